//! End-to-end behaviour of the efficiency model and its optimizers.

use fbl_eee::channel::{ChannelConfig, OperatingPoint};
use fbl_eee::effcap::{self, BufferMode, EcModel, PowerModelConfig, QosConfig};
use fbl_eee::optimize::{
    evaluate_candidate, optimal_epsilon, optimal_power, solve_constrained, EpsilonRule, RateConstraint,
    SolveConstraints,
};
use fbl_eee::{db_to_linear, ChannelConfigF64, Error};

fn cfg() -> ChannelConfigF64 {
    ChannelConfig::new(500).unwrap()
}

fn power(mode: BufferMode) -> PowerModelConfig {
    PowerModelConfig::new(0.2, 0.2, mode).unwrap()
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (lo.ln() + (hi / lo).ln() * i as f64 / (n - 1) as f64).exp())
        .collect()
}

fn slope_sign_changes(v: &[f64]) -> usize {
    let signs: Vec<bool> = v.windows(2).filter(|w| w[1] != w[0]).map(|w| w[1] > w[0]).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

#[test]
fn eee_is_unimodal_in_epsilon() {
    let grid = log_grid(1e-10, 0.5, 1000);
    for mode in [BufferMode::FullBuffer, BufferMode::EmptyBufferAware] {
        for snr_db in [5.0, 10.0, 15.0] {
            let qos = QosConfig::with_outage(500.0, 1e-2, 1.0).unwrap();
            let eee: Vec<f64> = grid
                .iter()
                .map(|&e| {
                    evaluate_candidate(
                        &cfg(),
                        &qos,
                        &power(mode),
                        db_to_linear(snr_db),
                        EpsilonRule::Fixed(e),
                        EcModel::ClosedForm,
                    )
                    .unwrap()
                    .eee
                })
                .collect();
            assert!(slope_sign_changes(&eee) <= 1, "{mode:?} at {snr_db} dB");
        }
    }
}

#[test]
fn empty_buffer_never_loses() {
    let qos = QosConfig::with_exponent(0.01, 1.0).unwrap();
    for snr_db in [5.0, 10.0, 20.0, 30.0] {
        for e in [1e-6, 1e-3, 1e-1] {
            let p = OperatingPoint::new(db_to_linear(snr_db), e, 0.01).unwrap();
            let fb = effcap::eee(&cfg(), &qos, &power(BufferMode::FullBuffer), &p, EcModel::ClosedForm).unwrap();
            let ebp = effcap::eee(
                &cfg(),
                &qos,
                &power(BufferMode::EmptyBufferAware),
                &p,
                EcModel::ClosedForm,
            )
            .unwrap();
            assert!(ebp >= fb, "{snr_db} dB, eps {e}");
        }
    }
}

#[test]
fn shannon_bounds_finite_blocklength() {
    let qos = QosConfig::with_exponent(0.01, 0.5).unwrap();
    for mode in [BufferMode::FullBuffer, BufferMode::EmptyBufferAware] {
        for snr_db in [0.0, 10.0, 20.0] {
            for e in [1e-8, 1e-4, 1e-2, 0.3, 0.49] {
                let p = OperatingPoint::new(db_to_linear(snr_db), e, 0.01).unwrap();
                let fbl = effcap::eee(&cfg(), &qos, &power(mode), &p, EcModel::ClosedForm).unwrap();
                let sh = effcap::shannon_baseline_eee(&cfg(), &qos, &power(mode), &p).unwrap();
                assert!(sh >= fbl, "{mode:?} {snr_db} dB eps {e}: {sh} < {fbl}");
            }
        }
    }
}

#[test]
fn closed_form_tracks_oracle_at_high_snr() {
    for theta in [1e-3_f64, 1e-2] {
        let p = OperatingPoint::new(db_to_linear(20.0), 1e-3, theta).unwrap();
        let c = effcap::effective_capacity(&cfg(), &p, EcModel::ClosedForm).unwrap();
        let o = effcap::effective_capacity(&cfg(), &p, EcModel::Oracle).unwrap();
        assert!(((c - o) / o).abs() < 0.05, "theta {theta}: {c} vs {o}");
    }
}

#[test]
fn single_precision_agrees_with_double() {
    let c32 = ChannelConfig::new(500).unwrap();
    let p32 = OperatingPoint::<f32>::new(10.0, 1e-3, 0.01).unwrap();
    let p64 = OperatingPoint::<f64>::new(10.0, 1e-3, 0.01).unwrap();
    let ec32 = effcap::effective_capacity(&c32, &p32, EcModel::ClosedForm).unwrap();
    let ec64 = effcap::effective_capacity(&cfg(), &p64, EcModel::ClosedForm).unwrap();
    assert!((f64::from(ec32) - ec64).abs() < 1e-3 * ec64);
}

#[test]
fn optimal_epsilon_beats_neighbours() {
    for snr_db in [0.0, 10.0, 20.0] {
        let rho = db_to_linear(snr_db);
        let opt = optimal_epsilon(&cfg(), rho, 0.01).unwrap();
        let psi = |e: f64| effcap::j_function(&cfg(), rho, 0.01, e).unwrap().psi(e);
        assert!(!opt.at_boundary);
        for f in [0.5, 0.9, 1.1, 2.0] {
            assert!(opt.psi <= psi(opt.epsilon * f) * (1.0 + 1e-12));
        }
    }
}

#[test]
fn optimal_power_beats_neighbours() {
    let qos = QosConfig::with_exponent(0.01, 1.0).unwrap();
    for mode in [BufferMode::FullBuffer, BufferMode::EmptyBufferAware] {
        let opt = optimal_power(&cfg(), &qos, &power(mode), 1e-3).unwrap();
        for d_db in [-1.0, -0.1, 0.1, 1.0] {
            let rho = opt.rho * db_to_linear(d_db);
            let p = OperatingPoint::new(rho, 1e-3, 0.01).unwrap();
            let other = effcap::eee(&cfg(), &qos, &power(mode), &p, EcModel::ClosedForm).unwrap();
            assert!(opt.eee >= other, "{mode:?} offset {d_db} dB");
        }
    }
}

#[test]
fn solver_respects_every_constraint() {
    let qos = QosConfig::with_outage(1000.0, 1e-2, 0.5).unwrap();
    for mode in [BufferMode::FullBuffer, BufferMode::EmptyBufferAware] {
        let cons = SolveConstraints::new(db_to_linear(20.0), 1e-3, qos, power(mode)).unwrap();
        let r = solve_constrained(&cfg(), &cons);
        assert!(r.feasible, "{mode:?}: {:?}", r.infeasibility);
        assert!(r.rho_star <= db_to_linear(20.0) * (1.0 + 1e-12));
        assert!(r.epsilon_star <= 1e-3);
        assert!(r.ec_star >= 0.5);
        let outage = r.p_nb * (-r.theta_star * 0.5 * 1000.0).exp();
        assert!((outage - 1e-2).abs() < 1e-9);
    }
}

#[test]
fn relaxing_the_rate_constraint_never_hurts() {
    let qos = QosConfig::with_outage(300.0, 1e-2, 1.0).unwrap();
    let base = SolveConstraints::new(db_to_linear(10.0), 1e-3, qos, power(BufferMode::FullBuffer)).unwrap();
    let enforced = solve_constrained(&cfg(), &base);
    let relaxed = solve_constrained(&cfg(), &base.with_rate_constraint(RateConstraint::Relax));
    assert!(relaxed.eee_star >= enforced.eee_star * (1.0 - 1e-9));
}

#[test]
fn unstable_queue_is_reported() {
    let qos = QosConfig::with_exponent(0.01, 5.0).unwrap();
    let p = OperatingPoint::new(1.0, 1e-3, 0.01).unwrap();
    let r = effcap::eee(
        &cfg(),
        &qos,
        &power(BufferMode::EmptyBufferAware),
        &p,
        EcModel::ClosedForm,
    );
    assert!(matches!(r, Err(Error::Infeasible(_))));
}
