//! Optimal error probability, transmit power and delay exponent, and the constrained
//! joint problem.

mod power;
mod solve;

pub use power::{optimal_power, optimal_power_with, stationarity_gap, PowerBounds, PowerOptimum};
pub use solve::{
    solve_constrained, EpsilonMode, LineSearch, RateConstraint, SolveConstraints, SolveDiagnostics, SolveResult,
};

use crate::channel::{self, ChannelConfig, ExpectationMethod, OperatingPoint};
use crate::effcap::{self, BufferMode, DelayTarget, EcModel, PowerModelConfig, QosConfig};
use crate::error::{domain, Error, Result};
use crate::search::golden_section_minimize;
use crate::Real;

/// Lower end of the ε search interval.
pub const EPSILON_FLOOR: f64 = 1e-12;
/// Golden-section tolerance on `ln ε`; bounds the absolute error on ε by 1e-8.
const LOG_EPSILON_TOL: f64 = 1e-8;
/// Fixed-point tolerance on ε when the mean rate depends on it.
const EPSILON_FIXED_POINT_TOL: f64 = 1e-13;
const EPSILON_FIXED_POINT_MAX: usize = 64;

/// Upper end of the ε search interval.
pub fn epsilon_ceiling<T: Real>() -> T {
    T::one() - T::lit(EPSILON_FLOOR).max(T::epsilon())
}

/// Minimizer of `ψ(ε)` at fixed `(ρ, θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonOptimum<T = f64> {
    pub epsilon: T,
    pub psi: T,
    pub iterations: usize,
    /// The minimizer sits on an end of `[1e-12, 1 − 1e-12]`.
    pub at_boundary: bool,
}

/// `ε` maximizing effective capacity (hence EEE) under the closed form.
pub fn optimal_epsilon<T: Real>(cfg: &ChannelConfig, rho: T, theta: T) -> Result<EpsilonOptimum<T>> {
    optimal_epsilon_with(cfg, rho, theta, EcModel::ClosedForm)
}

/// `ψ(ε)` at fixed `(ρ, θ)`, with the ε-independent parts computed once.
pub fn psi_of_epsilon<T: Real>(
    cfg: &ChannelConfig,
    rho: T,
    theta: T,
    model: EcModel,
) -> Result<impl Fn(T) -> Result<T>> {
    let cfg = *cfg;
    if !(rho > T::zero()) || !rho.is_finite() {
        return Err(domain("rho must be positive", rho));
    }
    if !(theta > T::zero()) || !theta.is_finite() {
        return Err(domain("theta must be positive", theta));
    }
    let combos = match model {
        EcModel::Oracle => None,
        EcModel::ClosedForm => Some(effcap::combos(&cfg, rho, theta)?),
        EcModel::Shannon => Some((
            crate::specfun::scaled_gamma_combo(effcap::alpha(&cfg, theta), rho)?,
            T::zero(),
        )),
    };
    Ok(move |eps: T| -> Result<T> {
        match (model, combos) {
            (EcModel::ClosedForm, Some((c0, c2))) => {
                Ok(effcap::terms_from_combos(&cfg, rho, theta, eps, c0, c2)?.psi(eps))
            }
            (EcModel::Shannon, Some((c0, _))) => Ok(eps + (T::one() - eps) * c0),
            _ => {
                let point = OperatingPoint::new(rho, eps, theta)?;
                Ok(channel::rate_functional_expectation(&cfg, &point, ExpectationMethod::Quadrature)?.mean)
            }
        }
    })
}

/// `ε` minimizing `ψ` under `model`, by golden-section search in `ln ε`.
pub fn optimal_epsilon_with<T: Real>(
    cfg: &ChannelConfig,
    rho: T,
    theta: T,
    model: EcModel,
) -> Result<EpsilonOptimum<T>> {
    let psi = psi_of_epsilon(cfg, rho, theta, model)?;
    let lo = T::lit(EPSILON_FLOOR).ln();
    let hi = epsilon_ceiling::<T>().ln();
    let failure = std::cell::RefCell::new(None);
    let res = golden_section_minimize(
        |u: T| match psi(u.exp()) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                T::nan()
            }
        },
        lo,
        hi,
        T::lit(LOG_EPSILON_TOL),
        500,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let edge = T::lit(4.0 * LOG_EPSILON_TOL);
    Ok(EpsilonOptimum {
        epsilon: res.x.exp(),
        psi: res.value,
        iterations: res.iterations,
        at_boundary: res.x - lo <= edge || hi - res.x <= edge,
    })
}

/// Delay exponent and whether the outage constraint is slack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaChoice<T = f64> {
    pub theta: T,
    /// `P_nb ≤ Λ`: the outage target holds for every θ ≥ 0 and `theta` is the 0 sentinel.
    pub slack: bool,
}

/// θ meeting `P_nb e^{−θλδ} = Λ`, or the given exponent when θ is specified directly.
pub fn optimal_theta<T: Real>(qos: &QosConfig<T>, p_nb: T) -> Result<ThetaChoice<T>> {
    if !(p_nb > T::zero() && p_nb <= T::one()) {
        return Err(domain("p_nb must lie in (0,1]", p_nb));
    }
    match qos.target {
        DelayTarget::Exponent(theta) => Ok(ThetaChoice { theta, slack: false }),
        DelayTarget::Outage { delta, lambda_out } => {
            if p_nb <= lambda_out {
                return Ok(ThetaChoice {
                    theta: T::zero(),
                    slack: true,
                });
            }
            Ok(ThetaChoice {
                theta: (p_nb / lambda_out).ln() / (qos.arrival_rate * delta),
                slack: false,
            })
        }
    }
}

/// How ε is chosen at a candidate power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsilonRule<T = f64> {
    Fixed(T),
    /// `min(ε*, cap)`.
    OptimalCapped(T),
}

/// Everything resolved at one transmit power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate<T = f64> {
    pub rho: T,
    pub epsilon: T,
    pub theta: T,
    pub p_nb: T,
    pub mean_rate: Option<T>,
    pub ec: T,
    pub eee: T,
    /// ε* fell on the search boundary (only meaningful for [`EpsilonRule::OptimalCapped`]).
    pub epsilon_at_boundary: bool,
    pub epsilon_iterations: usize,
}

/// Resolve `P_nb`, θ and ε at `rho`, then evaluate EC and EEE.
///
/// Under the empty-buffer model with the finite-blocklength rate, `E[r]` depends on ε,
/// so `ε → E[r] → P_nb → θ → ε` is iterated to a fixed point.
pub fn evaluate_candidate<T: Real>(
    cfg: &ChannelConfig,
    qos: &QosConfig<T>,
    pm: &PowerModelConfig<T>,
    rho: T,
    rule: EpsilonRule<T>,
    model: EcModel,
) -> Result<Candidate<T>> {
    if !(rho > T::zero()) || !rho.is_finite() {
        return Err(domain("rho must be positive", rho));
    }
    let (mut eps, cap, optimize) = match rule {
        EpsilonRule::Fixed(e) => (e, e, false),
        EpsilonRule::OptimalCapped(c) => (c, c, true),
    };
    if !(eps > T::zero() && eps < T::one()) {
        return Err(domain("epsilon must lie in (0,1)", eps));
    }
    let rate_depends_on_eps = pm.buffer_mode == BufferMode::EmptyBufferAware && !model.is_shannon();
    let mut at_boundary = false;
    let mut iterations = 0;
    let (p_nb, mean_rate, theta) = loop {
        iterations += 1;
        let (p_nb, mean_rate) = match pm.buffer_mode {
            BufferMode::FullBuffer => (T::one(), None),
            BufferMode::EmptyBufferAware => {
                let m = effcap::mean_rate(cfg, rho, eps, model)?;
                (effcap::non_empty_probability(qos.arrival_rate, m)?, Some(m))
            }
        };
        let choice = optimal_theta(qos, p_nb)?;
        if choice.slack || !(choice.theta > T::zero()) {
            return Err(Error::Infeasible(format!(
                "delay outage target slack at rho={} (p_nb={})",
                rho.as_f64(),
                p_nb.as_f64()
            )));
        }
        if !optimize {
            break (p_nb, mean_rate, choice.theta);
        }
        let opt = optimal_epsilon_with(cfg, rho, choice.theta, model)?;
        let next = opt.epsilon.min(cap);
        at_boundary = opt.at_boundary;
        let converged = (next - eps).abs() <= T::lit(EPSILON_FIXED_POINT_TOL);
        if !rate_depends_on_eps || converged || iterations >= EPSILON_FIXED_POINT_MAX {
            if rate_depends_on_eps && !converged {
                return Err(Error::Degenerate(format!(
                    "epsilon fixed point did not converge at rho={}",
                    rho.as_f64()
                )));
            }
            if !rate_depends_on_eps {
                eps = next;
            }
            break (p_nb, mean_rate, choice.theta);
        }
        eps = next;
    };
    let point = OperatingPoint::new(rho, eps, theta)?;
    let ec = effcap::effective_capacity(cfg, &point, model)?;
    let eee = ec / (p_nb * pm.zeta * rho + pm.p_c);
    Ok(Candidate {
        rho,
        epsilon: eps,
        theta,
        p_nb,
        mean_rate,
        ec,
        eee,
        epsilon_at_boundary: at_boundary,
        epsilon_iterations: iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ChannelConfig {
        ChannelConfig::new(500).unwrap()
    }

    #[test]
    fn theta_from_outage_target() {
        let qos = QosConfig::with_outage(500.0_f64, 1e-2, 1.0).unwrap();
        let t = optimal_theta(&qos, 1.0).unwrap();
        assert!((t.theta - 0.009_210_340_371_976_183).abs() < 1e-15);
        assert!(!t.slack);
        assert!((1.0 * (-t.theta * 500.0_f64).exp() - 1e-2).abs() < 1e-15);
        let qos = QosConfig::with_outage(500.0_f64, 1e-3, 1.0).unwrap();
        assert!((optimal_theta(&qos, 1.0).unwrap().theta - 0.013_815_510_557_964_274).abs() < 1e-15);
    }

    #[test]
    fn slack_outage_gives_sentinel() {
        let qos = QosConfig::with_outage(500.0_f64, 1e-2, 1.0).unwrap();
        let t = optimal_theta(&qos, 5e-3).unwrap();
        assert!(t.slack);
        assert_eq!(t.theta, 0.0);
        assert!(optimal_theta(&qos, 1.5).is_err());
    }

    #[test]
    fn direct_exponent_passes_through() {
        let qos = QosConfig::with_exponent(0.02_f64, 1.0).unwrap();
        assert_eq!(optimal_theta(&qos, 0.3).unwrap().theta, 0.02);
    }

    #[test]
    fn optimal_epsilon_is_interior_and_locally_optimal() {
        let opt = optimal_epsilon(&cfg(), 10.0_f64, 0.01).unwrap();
        assert!(opt.epsilon > 0.0 && opt.epsilon < 0.5);
        assert!(!opt.at_boundary);
        let psi = psi_of_epsilon(&cfg(), 10.0_f64, 0.01, EcModel::ClosedForm).unwrap();
        for d in [0.01, 1e-4, 1e-6] {
            if opt.epsilon > d {
                assert!(psi(opt.epsilon - d).unwrap() >= opt.psi);
            }
            assert!(psi(opt.epsilon + d).unwrap() >= opt.psi);
        }
    }

    #[test]
    fn shannon_epsilon_hits_floor() {
        let opt = optimal_epsilon_with(&cfg(), 10.0_f64, 0.01, EcModel::Shannon).unwrap();
        assert!(opt.at_boundary);
        assert!((opt.epsilon - EPSILON_FLOOR).abs() < 1e-18);
    }

    #[test]
    fn fixed_point_is_self_consistent() {
        let qos = QosConfig::with_outage(500.0_f64, 1e-2, 1.0).unwrap();
        let pm = PowerModelConfig::new(0.2, 0.2, BufferMode::EmptyBufferAware).unwrap();
        let c = evaluate_candidate(
            &cfg(),
            &qos,
            &pm,
            10.0,
            EpsilonRule::OptimalCapped(1e-3),
            EcModel::ClosedForm,
        )
        .unwrap();
        let m = channel::expected_rate(&cfg(), c.rho, c.epsilon).unwrap();
        assert!((c.p_nb - 1.0 / m).abs() < 1e-9);
        let t = optimal_theta(&qos, c.p_nb).unwrap().theta;
        assert!((c.theta - t).abs() < 1e-15);
        let e = optimal_epsilon(&cfg(), c.rho, c.theta).unwrap().epsilon.min(1e-3);
        assert!((c.epsilon - e).abs() < 1e-9);
    }
}
