//! Randomized invariants of the special functions and the link model.

use approx::assert_relative_eq;
use fbl_eee::channel::{ChannelConfig, OperatingPoint};
use fbl_eee::effcap::{self, EcModel};
use fbl_eee::specfun::{self, QuadratureRule};
use proptest::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::gamma::{gamma, gamma_ur};

// Q(x) computed in double precision with the C library erfc.
const Q_TABLE: [(f64, f64); 12] = [
    (-6.0, 0.9999999990134123),
    (-2.5, 0.9937903346742238),
    (-0.3, 0.6179114221889526),
    (0.0, 0.5),
    (0.7349044856312162, 0.23119883317127607),
    (1.0, 0.15865525393145707),
    (3.0, 0.0013498980316300957),
    (5.0, 2.866515718791946e-07),
    (8.0, 6.220960574271819e-16),
    (12.0, 1.776482112077702e-33),
    (20.0, 2.7536241186063314e-89),
    (37.0, 5.725571222525139e-300),
];

#[test]
fn q_matches_table() {
    for (x, q) in Q_TABLE {
        assert_relative_eq!(specfun::gaussian_q(x), q, max_relative = 1e-13);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn q_inverse_round_trip(log_p in -30.0f64..(0.5f64).ln()) {
        let p = log_p.exp();
        let x = specfun::gaussian_q_inv(p).unwrap();
        assert_relative_eq!(specfun::gaussian_q(x), p, max_relative = 1e-10);
        // 1 - p is only representable to p relative accuracy when p is not tiny.
        if p > 1e-6 {
            assert_relative_eq!(specfun::gaussian_q_inv(1.0 - p).unwrap(), -x, epsilon = 1e-9, max_relative = 1e-9);
        }
    }

    #[test]
    fn q_matches_reference(x in -8.0f64..8.0) {
        // The statrs survival function is itself accurate to about 1e-10.
        assert_relative_eq!(specfun::gaussian_q(x), Normal::standard().sf(x), max_relative = 1e-9);
    }

    #[test]
    fn gamma_recurrence(a in -30.0f64..5.0, x in 0.01f64..30.0) {
        let lhs = specfun::upper_inc_gamma(a + 1.0, x).unwrap();
        let g = specfun::upper_inc_gamma(a, x).unwrap();
        let tail = (a * x.ln() - x).exp();
        let scale = lhs.abs().max((a * g).abs()).max(tail);
        prop_assert!((lhs - a * g - tail).abs() <= 1e-9 * scale);
    }

    #[test]
    fn upper_gamma_matches_reference(a in 0.2f64..15.0, x in 0.01f64..40.0) {
        let reference = gamma_ur(a, x) * gamma(a);
        assert_relative_eq!(specfun::upper_inc_gamma(a, x).unwrap(), reference, max_relative = 1e-9);
    }

    #[test]
    fn laguerre_rule_is_exact_for_polynomials(coeffs in prop::collection::vec(-1.0f64..1.0, 1..=32)) {
        let rule = QuadratureRule::<f64>::gauss_laguerre(16);
        let poly = |z: f64| coeffs.iter().rev().fold(0.0, |acc, &c| acc * z + c);
        let mut factorial = 1.0;
        let mut exact = 0.0;
        let mut scale = 0.0;
        for (k, c) in coeffs.iter().enumerate() {
            if k > 0 {
                factorial *= k as f64;
            }
            exact += c * factorial;
            scale += c.abs() * factorial;
        }
        let approx = specfun::exp_weight_quadrature(poly, &rule).unwrap();
        prop_assert!((approx - exact).abs() <= 1e-11 * scale);
    }

    #[test]
    fn gamma_combo_is_monotone(a in -50.0f64..-0.01, rho in 0.01f64..1e3, step in 1.01f64..3.0) {
        let c = specfun::scaled_gamma_combo(a, rho).unwrap();
        prop_assert!(c > 0.0 && c <= 1.0);
        prop_assert!(specfun::scaled_gamma_combo(a, rho * step).unwrap() <= c * (1.0 + 1e-12));
        prop_assert!(specfun::scaled_gamma_combo(a * step, rho).unwrap() <= c * (1.0 + 1e-12));
    }

    #[test]
    fn gamma_combo_is_log_convex(a in -40.0f64..-0.01, b in -40.0f64..-0.01, rho in 0.1f64..1e3) {
        let ca = specfun::scaled_gamma_combo(a, rho).unwrap();
        let cb = specfun::scaled_gamma_combo(b, rho).unwrap();
        let mid = specfun::scaled_gamma_combo(0.5 * (a + b), rho).unwrap();
        prop_assert!(mid * mid <= ca * cb * (1.0 + 1e-9));
    }

    #[test]
    fn psi_is_convex_in_epsilon(
        n in 100u32..2000,
        snr_db in 0.0f64..20.0,
        theta in 1e-3f64..0.1,
        log_e in -20.0f64..-1.0,
    ) {
        let cfg = ChannelConfig::new(n).unwrap();
        let rho = 10f64.powf(snr_db / 10.0);
        let e = log_e.exp();
        let t = effcap::j_function(&cfg, rho, theta, e).unwrap();
        // ψ is affine in ε for fixed J, and J itself is convex in the back-off.
        let h = 0.1 * e;
        let psi = |eps: f64| {
            let p = OperatingPoint::new(rho, eps, theta).unwrap();
            effcap::psi(&cfg, &p, EcModel::ClosedForm).unwrap()
        };
        assert_relative_eq!(t.psi(e), psi(e), max_relative = 1e-12);
        let (lo, mid, hi) = (psi(e - h), psi(e), psi(e + h));
        prop_assert!(lo + hi - 2.0 * mid >= -1e-12 * mid);
    }

    #[test]
    fn effective_capacity_nonincreasing_in_theta(
        n in 100u32..1500,
        snr_db in 0.0f64..20.0,
        theta in 1e-3f64..0.1,
        log_e in -12.0f64..-1.0,
    ) {
        let cfg = ChannelConfig::new(n).unwrap();
        let rho = 10f64.powf(snr_db / 10.0);
        let e = log_e.exp();
        for model in [EcModel::Oracle, EcModel::ClosedForm] {
            let ec = |th: f64| {
                effcap::effective_capacity(&cfg, &OperatingPoint::new(rho, e, th).unwrap(), model).unwrap()
            };
            prop_assert!(ec(1.5 * theta) <= ec(theta) * (1.0 + 1e-9));
        }
    }
}
