use super::{evaluate_candidate, Candidate, EpsilonRule};
use crate::channel::ChannelConfig;
use crate::effcap::{EcModel, PowerModelConfig, QosConfig};
use crate::error::{domain, Result};
use crate::search::golden_section_maximize;
use crate::{db_to_linear, linear_to_db, Real};

/// Line-search grid over ρ in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearch<T = f64> {
    pub rho_min_db: T,
    pub step_db: T,
    pub refine_db: T,
}

impl<T: Real> Default for LineSearch<T> {
    fn default() -> Self {
        Self {
            rho_min_db: T::lit(-20.0),
            step_db: T::lit(0.1),
            refine_db: T::lit(0.01),
        }
    }
}

/// Treatment of the `EC ≥ λ` constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RateConstraint {
    /// Only candidates meeting `EC ≥ λ` compete; if none does, fall back to the relaxed optimum.
    #[default]
    Enforce,
    /// Maximize over all valid candidates and report whether `EC ≥ λ` holds at the optimum.
    Relax,
}

/// How ε is set at each candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EpsilonMode {
    /// `min(ε*, ε_t)`.
    #[default]
    OptimalCapped,
    /// ε = ε_t.
    Target,
}

/// Caps and models for the joint problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveConstraints<T = f64> {
    pub rho_max: T,
    pub epsilon_t: T,
    pub qos: QosConfig<T>,
    pub power: PowerModelConfig<T>,
    pub rate_model: EcModel,
    pub rate_constraint: RateConstraint,
    pub epsilon_mode: EpsilonMode,
    pub line_search: LineSearch<T>,
}

impl<T: Real> SolveConstraints<T> {
    pub fn new(rho_max: T, epsilon_t: T, qos: QosConfig<T>, power: PowerModelConfig<T>) -> Result<Self> {
        if !(rho_max > T::zero()) || !rho_max.is_finite() {
            return Err(domain("rho_max must be positive", rho_max));
        }
        if !(epsilon_t > T::zero() && epsilon_t < T::one()) {
            return Err(domain("epsilon_t must lie in (0,1)", epsilon_t));
        }
        Ok(Self {
            rho_max,
            epsilon_t,
            qos,
            power,
            rate_model: EcModel::ClosedForm,
            rate_constraint: RateConstraint::Enforce,
            epsilon_mode: EpsilonMode::OptimalCapped,
            line_search: LineSearch::default(),
        })
    }

    pub fn with_rate_model(mut self, model: EcModel) -> Self {
        self.rate_model = model;
        self
    }

    pub fn with_rate_constraint(mut self, rc: RateConstraint) -> Self {
        self.rate_constraint = rc;
        self
    }

    pub fn with_epsilon_mode(mut self, mode: EpsilonMode) -> Self {
        self.epsilon_mode = mode;
        self
    }

    pub fn with_line_search(mut self, line_search: LineSearch<T>) -> Result<Self> {
        if !(line_search.step_db > T::zero()) || !(line_search.refine_db > T::zero()) {
            return Err(domain("line-search steps must be positive", line_search.step_db));
        }
        self.line_search = line_search;
        Ok(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveDiagnostics<T = f64> {
    pub grid_points: usize,
    /// Candidates with a stable queue and a binding delay target.
    pub valid_points: usize,
    /// Valid candidates that also meet `EC ≥ λ`.
    pub feasible_points: usize,
    pub refine_iterations: usize,
    pub refine_history: Vec<(T, T)>,
    pub epsilon_iterations: usize,
    pub epsilon_at_boundary: bool,
    /// The first error met on the grid, if any.
    pub first_error: Option<String>,
}

/// Optimizer output. When `feasible` is false the values describe the best valid
/// candidate with the `EC ≥ λ` constraint dropped, or are NaN if none exists.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult<T = f64> {
    pub rho_star: T,
    pub epsilon_star: T,
    pub theta_star: T,
    pub eee_star: T,
    pub ec_star: T,
    pub p_nb: T,
    pub mean_rate: Option<T>,
    pub feasible: bool,
    pub infeasibility: Option<String>,
    pub diagnostics: SolveDiagnostics<T>,
}

impl<T: Real> SolveResult<T> {
    fn from_candidate(c: &Candidate<T>, feasible: bool, reason: Option<String>, d: SolveDiagnostics<T>) -> Self {
        Self {
            rho_star: c.rho,
            epsilon_star: c.epsilon,
            theta_star: c.theta,
            eee_star: c.eee,
            ec_star: c.ec,
            p_nb: c.p_nb,
            mean_rate: c.mean_rate,
            feasible,
            infeasibility: reason,
            diagnostics: SolveDiagnostics {
                epsilon_iterations: c.epsilon_iterations,
                epsilon_at_boundary: c.epsilon_at_boundary,
                ..d
            },
        }
    }
}

/// Maximize EEE over ρ ≤ ρ_max with θ from the outage target, ε = min(ε*, ε_t) and
/// `EC ≥ λ`.
///
/// Candidates with an unstable queue or a slack delay target are skipped.
pub fn solve_constrained<T: Real>(cfg: &ChannelConfig, cons: &SolveConstraints<T>) -> SolveResult<T> {
    let ls = cons.line_search;
    let lambda = cons.qos.arrival_rate;
    let rule = match cons.epsilon_mode {
        EpsilonMode::OptimalCapped => EpsilonRule::OptimalCapped(cons.epsilon_t),
        EpsilonMode::Target => EpsilonRule::Fixed(cons.epsilon_t),
    };
    let eval = |x_db: T| evaluate_candidate(cfg, &cons.qos, &cons.power, db_to_linear(x_db), rule, cons.rate_model);

    let hi_db = linear_to_db(cons.rho_max);
    let mut grid = Vec::new();
    if hi_db > ls.rho_min_db {
        let count = ((hi_db - ls.rho_min_db) / ls.step_db).floor().to_usize().unwrap_or(0) + 1;
        grid.extend((0..count).map(|i| ls.rho_min_db + ls.step_db * T::from_usize_lossy(i)));
        if hi_db - grid[count - 1] > ls.step_db * T::lit(1e-6) {
            grid.push(hi_db);
        }
    } else {
        grid.push(hi_db);
    }

    let mut diag = SolveDiagnostics {
        grid_points: grid.len(),
        valid_points: 0,
        feasible_points: 0,
        refine_iterations: 0,
        refine_history: Vec::new(),
        epsilon_iterations: 0,
        epsilon_at_boundary: false,
        first_error: None,
    };
    let mut evaluated: Vec<Option<Candidate<T>>> = Vec::with_capacity(grid.len());
    for &x in &grid {
        match eval(x) {
            Ok(c) => {
                diag.valid_points += 1;
                if c.ec >= lambda {
                    diag.feasible_points += 1;
                }
                evaluated.push(Some(c));
            }
            Err(e) => {
                diag.first_error.get_or_insert_with(|| e.to_string());
                evaluated.push(None);
            }
        }
    }

    let enforce = cons.rate_constraint == RateConstraint::Enforce && diag.feasible_points > 0;
    let admissible = |c: &Candidate<T>| !enforce || c.ec >= lambda;
    let best = evaluated
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.as_ref().filter(|c| admissible(c)).map(|c| (i, c)))
        .fold(None::<(usize, &Candidate<T>)>, |acc, (i, c)| match acc {
            Some((_, b)) if b.eee >= c.eee => acc,
            _ => Some((i, c)),
        });

    let Some((best_i, best_c)) = best else {
        let reason = format!(
            "no valid operating point for rho <= {} dB: {}",
            hi_db.as_f64(),
            diag.first_error.clone().unwrap_or_default()
        );
        let nan = T::nan();
        return SolveResult {
            rho_star: nan,
            epsilon_star: nan,
            theta_star: nan,
            eee_star: nan,
            ec_star: nan,
            p_nb: nan,
            mean_rate: None,
            feasible: false,
            infeasibility: Some(reason),
            diagnostics: diag,
        };
    };

    let mut chosen = *best_c;
    if grid.len() > 1 {
        let left = grid[best_i.saturating_sub(1)];
        let right = grid[(best_i + 1).min(grid.len() - 1)];
        let objective = |x: T| match eval(x) {
            Ok(c) if admissible(&c) => c.eee,
            _ => T::nan(),
        };
        let refined = golden_section_maximize(objective, left, right, ls.refine_db, 200);
        diag.refine_iterations = refined.iterations;
        diag.refine_history = refined.history;
        if refined.value.is_finite() && refined.value > chosen.eee {
            if let Ok(c) = eval(refined.x) {
                if admissible(&c) {
                    chosen = c;
                }
            }
        }
    }

    let feasible = chosen.ec >= lambda;
    let reason = (!feasible).then(|| {
        let max_ec = evaluated.iter().flatten().map(|c| c.ec).fold(T::neg_infinity(), T::max);
        if diag.feasible_points == 0 {
            format!(
                "effective capacity stays below the arrival rate {} for rho <= {} dB (largest {})",
                lambda.as_f64(),
                hi_db.as_f64(),
                max_ec.as_f64()
            )
        } else {
            format!(
                "effective capacity {} at the relaxed optimum is below the arrival rate {}",
                chosen.ec.as_f64(),
                lambda.as_f64()
            )
        }
    });
    SolveResult::from_candidate(&chosen, feasible, reason, diag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effcap::BufferMode;

    fn cons(mode: BufferMode, rho_max_db: f64, arrival: f64) -> SolveConstraints {
        SolveConstraints::new(
            db_to_linear(rho_max_db),
            1e-3,
            QosConfig::with_outage(500.0, 1e-2, arrival).unwrap(),
            PowerModelConfig::new(0.2, 0.2, mode).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn validation() {
        let c = cons(BufferMode::FullBuffer, 10.0, 1.0);
        assert!(SolveConstraints::new(0.0, 1e-3, c.qos, c.power).is_err());
        assert!(SolveConstraints::new(10.0, 1.5, c.qos, c.power).is_err());
    }

    #[test]
    fn tiny_power_budget_is_infeasible() {
        let cfg = ChannelConfig::new(500).unwrap();
        for mode in [BufferMode::FullBuffer, BufferMode::EmptyBufferAware] {
            let r = solve_constrained(&cfg, &cons(mode, -20.0, 1.0));
            assert!(!r.feasible);
            assert!(r.infeasibility.is_some());
        }
    }

    #[test]
    fn feasible_solution_meets_constraints() {
        let cfg = ChannelConfig::new(500).unwrap();
        let c = cons(BufferMode::FullBuffer, db_to_linear(20.0), 0.5);
        let c = SolveConstraints {
            rho_max: db_to_linear(20.0),
            ..c
        };
        let r = solve_constrained(&cfg, &c);
        assert!(r.feasible, "{:?}", r.infeasibility);
        assert!(r.ec_star >= 0.5);
        assert!(r.rho_star <= c.rho_max * (1.0 + 1e-12));
        assert!(r.epsilon_star <= 1e-3);
        let outage = r.p_nb * (-r.theta_star * 0.5 * 500.0_f64).exp();
        assert!((outage - 1e-2).abs() < 1e-9);
    }

    #[test]
    fn relaxed_optimum_dominates_enforced() {
        let cfg = ChannelConfig::new(500).unwrap();
        let mut c = cons(BufferMode::FullBuffer, 10.0, 1.0);
        c.qos = QosConfig::with_outage(1000.0, 1e-2, 1.0).unwrap();
        let enforced = solve_constrained(&cfg, &c);
        let relaxed = solve_constrained(&cfg, &c.with_rate_constraint(RateConstraint::Relax));
        assert!(enforced.feasible);
        assert!(relaxed.eee_star >= enforced.eee_star);
        assert_eq!(relaxed.feasible, relaxed.ec_star >= 1.0);
    }

    #[test]
    fn target_epsilon_mode_uses_cap() {
        let cfg = ChannelConfig::new(500).unwrap();
        let c = cons(BufferMode::FullBuffer, 10.0, 1.0).with_rate_model(EcModel::Shannon);
        let r = solve_constrained(&cfg, &c.with_epsilon_mode(EpsilonMode::Target));
        assert_eq!(r.epsilon_star, 1e-3);
        let r = solve_constrained(&cfg, &c);
        assert!(r.epsilon_star < 1e-11);
    }

    #[test]
    fn empty_buffer_beats_full_buffer() {
        let cfg = ChannelConfig::new(500).unwrap();
        let fb = solve_constrained(&cfg, &cons(BufferMode::FullBuffer, 10.0, 1.0));
        let ebp = solve_constrained(&cfg, &cons(BufferMode::EmptyBufferAware, 10.0, 1.0));
        assert!(ebp.eee_star > fb.eee_star, "{} vs {}", ebp.eee_star, fb.eee_star);
    }
}
