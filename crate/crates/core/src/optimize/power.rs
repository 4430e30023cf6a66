use super::{evaluate_candidate, optimal_theta, Candidate, EpsilonRule};
use crate::channel::ChannelConfig;
use crate::effcap::{self, BufferMode, EcModel, PowerModelConfig, QosConfig};
use crate::error::{Error, Result};
use crate::search::{brent_root, golden_section_maximize};
use crate::specfun::scaled_gamma_combo;
use crate::{db_to_linear, linear_to_db, Real};

/// Scan range and resolution for the power search, in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBounds<T = f64> {
    pub lo_db: T,
    pub hi_db: T,
    pub step_db: T,
}

impl<T: Real> Default for PowerBounds<T> {
    fn default() -> Self {
        Self {
            lo_db: T::lit(-20.0),
            hi_db: T::lit(40.0),
            step_db: T::lit(0.1),
        }
    }
}

/// Result of the power optimization.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerOptimum<T = f64> {
    /// Golden-section maximizer of EEE (authoritative).
    pub rho: T,
    pub eee: T,
    pub candidate: Candidate<T>,
    pub golden_iterations: usize,
    /// Root of the stationarity condition when a sign change was bracketed.
    pub root_rho: Option<T>,
    pub root_iterations: Option<usize>,
    /// `|10 log10(root_rho / rho)|`.
    pub disagreement_db: Option<T>,
    pub grid_points: usize,
}

const GOLDEN_TOL_DB: f64 = 1e-6;
const ROOT_TOL_DB: f64 = 1e-9;
const FLAT_TOL: f64 = 1e-12;
/// Routes disagreeing by more than this are reported on stderr.
pub const ROUTE_AGREEMENT_DB: f64 = 0.05;

/// EEE-optimal transmit power at fixed ε under the closed form.
pub fn optimal_power<T: Real>(
    cfg: &ChannelConfig,
    qos: &QosConfig<T>,
    pm: &PowerModelConfig<T>,
    epsilon: T,
) -> Result<PowerOptimum<T>> {
    optimal_power_with(cfg, qos, pm, epsilon, EcModel::ClosedForm, &PowerBounds::default())
}

/// Stationarity residual `ζη + (1−ε)𝒥′/(nθψ)` at full buffer and constant θ.
///
/// The EEE slope has the opposite sign, so a maximizer is a crossing from negative to
/// positive.
pub fn stationarity_gap<T: Real>(
    cfg: &ChannelConfig,
    pm: &PowerModelConfig<T>,
    rho: T,
    theta: T,
    epsilon: T,
    model: EcModel,
) -> Result<T> {
    let (j, jp) = match model {
        EcModel::ClosedForm => {
            let t = effcap::j_function(cfg, rho, theta, epsilon)?;
            (t.j_value, t.j_prime)
        }
        EcModel::Shannon => {
            let a = effcap::alpha(cfg, theta);
            let c = scaled_gamma_combo(a, rho)?;
            (c, -((T::one() - a * rho) * c - T::one()) / (rho * rho))
        }
        EcModel::Oracle => return Err(Error::Degenerate("stationarity needs a closed-form derivative".into())),
    };
    let psi = epsilon + (T::one() - epsilon) * j;
    let ec = effcap::ec_from_psi(cfg, psi, theta)?;
    let eta = ec / (pm.zeta * rho + pm.p_c);
    Ok(pm.zeta * eta + (T::one() - epsilon) * jp / (cfg.n::<T>() * theta * psi))
}

/// EEE-optimal transmit power at fixed ε: grid scan, golden-section refinement and,
/// where θ does not depend on ρ, a Brent solve of the stationarity condition.
pub fn optimal_power_with<T: Real>(
    cfg: &ChannelConfig,
    qos: &QosConfig<T>,
    pm: &PowerModelConfig<T>,
    epsilon: T,
    model: EcModel,
    bounds: &PowerBounds<T>,
) -> Result<PowerOptimum<T>> {
    if !(bounds.step_db > T::zero()) || !(bounds.hi_db > bounds.lo_db) {
        return Err(Error::Degenerate(
            "power bounds must satisfy lo < hi and step > 0".into(),
        ));
    }
    let eval = |x_db: T| evaluate_candidate(cfg, qos, pm, db_to_linear(x_db), EpsilonRule::Fixed(epsilon), model);
    let objective = |x_db: T| eval(x_db).map(|c| c.eee).unwrap_or(T::nan());

    let count = ((bounds.hi_db - bounds.lo_db) / bounds.step_db + T::lit(1e-9))
        .floor()
        .to_usize()
        .unwrap_or(0)
        + 1;
    let grid: Vec<T> = (0..count)
        .map(|i| bounds.lo_db + bounds.step_db * T::from_usize_lossy(i))
        .collect();
    let values: Vec<T> = grid.iter().map(|&x| objective(x)).collect();
    let finite: Vec<T> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        return Err(eval(grid[count / 2])
            .err()
            .unwrap_or_else(|| Error::Infeasible("EEE undefined over the whole power range".into())));
    }
    let (lo_v, hi_v) = finite
        .iter()
        .fold((T::infinity(), T::neg_infinity()), |(l, h), &v| (l.min(v), h.max(v)));
    if hi_v - lo_v < T::lit(FLAT_TOL) {
        return Err(Error::Degenerate(format!(
            "EEE is numerically flat over [{}, {}] dB",
            bounds.lo_db.as_f64(),
            bounds.hi_db.as_f64()
        )));
    }
    let mut best = values.iter().position(|v| v.is_finite()).unwrap_or(0);
    for (i, &v) in values.iter().enumerate() {
        if v.is_finite() && v > values[best] {
            best = i;
        }
    }
    let left = grid[best.saturating_sub(1)];
    let right = grid[(best + 1).min(count - 1)];
    let golden = golden_section_maximize(objective, left, right, T::lit(GOLDEN_TOL_DB), 200);
    let (x_star, _) = if golden.value.is_finite() && golden.value >= values[best] {
        (golden.x, golden.value)
    } else {
        (grid[best], values[best])
    };
    let candidate = eval(x_star)?;

    // Root route: only at full buffer, where P_nb and θ do not move with ρ.
    let constant_theta = pm.buffer_mode == BufferMode::FullBuffer;
    let mut root_rho = None;
    let mut root_iterations = None;
    if constant_theta && model != EcModel::Oracle && best > 0 && best + 1 < count {
        let theta = optimal_theta(qos, T::one())?.theta;
        let gap = |x_db: T| stationarity_gap(cfg, pm, db_to_linear(x_db), theta, epsilon, model).unwrap_or(T::nan());
        let (gl, gr) = (gap(left), gap(right));
        if gl < T::zero() && gr > T::zero() {
            if let Ok(root) = brent_root(gap, left, right, T::lit(ROOT_TOL_DB), 200) {
                root_rho = Some(db_to_linear(root.x));
                root_iterations = Some(root.iterations);
            }
        }
    }
    let disagreement_db = root_rho.map(|r| (linear_to_db(r) - x_star).abs());
    if let Some(d) = disagreement_db {
        if d > T::lit(ROUTE_AGREEMENT_DB) {
            eprintln!(
                "warning: stationarity root and direct maximizer differ by {:.4} dB; using the direct maximizer",
                d.as_f64()
            );
        }
    }
    Ok(PowerOptimum {
        rho: candidate.rho,
        eee: candidate.eee,
        candidate,
        golden_iterations: golden.iterations,
        root_rho,
        root_iterations,
        disagreement_db,
        grid_points: count,
    })
}
