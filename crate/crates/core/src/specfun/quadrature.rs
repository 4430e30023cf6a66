//! Quadrature rules for expectations over a unit-mean exponential variable.
//!
//! Every rule approximates `∫_0^∞ f(z) e^{-z} dz` as `Σ w_i f(z_i)`. Two families are
//! provided:
//!
//! * [`QuadratureRule::gauss_laguerre`], the classical rule, exact for polynomials of
//!   degree `2N-1` and accurate for smooth integrands varying on unit scale.
//! * [`QuadratureRule::graded`], a composite rule whose Gauss-Legendre panels double
//!   in width from a caller-supplied length scale, followed by a shifted Gauss-Laguerre
//!   tail. Integrands such as `(1+ρz)^a` with `ρ|a| ≫ 1` collapse within `1/(ρ|a|)` of
//!   the origin, far inside the first Gauss-Laguerre node, and need this rule.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::Real;

/// Default rule order.
pub const DEFAULT_ORDER: usize = 64;
/// Order used when the default disagrees with its doubled-order check.
pub const ESCALATED_ORDER: usize = 128;
/// Relative disagreement between the two orders that triggers escalation.
pub const SELF_CHECK_TOLERANCE: f64 = 1e-7;

/// Start of the Gauss-Laguerre tail of the graded rule; `e^{-40} ≈ 4e-18`.
const GRADED_TAIL_START: f64 = 40.0;
/// Number of halvings of the length scale covered by the graded panels.
const GRADED_FINE_LEVELS: i32 = 24;

/// Nodes and positive weights of a rule for the weight `e^{-z}` on `[0, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<T = f64> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> QuadratureRule<T> {
    /// Builds a rule from raw parts. Nodes must be positive and strictly increasing,
    /// weights positive, and both of the same length.
    pub fn new(nodes: Vec<T>, weights: Vec<T>) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != weights.len() {
            return Err(Error::Domain {
                what: "rule needs equally many nodes and weights",
                value: nodes.len() as f64,
            });
        }
        if nodes[0] <= T::zero() || nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain {
                what: "rule nodes must be positive and strictly increasing",
                value: nodes[0].as_f64(),
            });
        }
        if let Some(w) = weights.iter().find(|w| !(**w > T::zero())) {
            return Err(Error::Domain {
                what: "rule weights must be positive",
                value: w.as_f64(),
            });
        }
        Ok(Self { nodes, weights })
    }

    /// `n`-point Gauss-Laguerre rule.
    pub fn gauss_laguerre(n: usize) -> Self {
        let (x, w) = laguerre_f64(n);
        Self::from_f64_parts(&x, &w)
    }

    /// Composite rule graded around the length scale `scale` (clamped to `(0, 1]`).
    ///
    /// Panels cover `[0, s·2^-24]`, then `[s·2^k, s·2^(k+1)]` up to `z = 40`, each with
    /// `order / 4` Gauss-Legendre points; `[40, ∞)` uses a shifted `order`-point
    /// Gauss-Laguerre rule.
    pub fn graded(scale: T, order: usize) -> Self {
        let scale = scale.as_f64();
        let scale = if scale > 0.0 && scale.is_finite() {
            scale.min(1.0)
        } else {
            1.0
        };
        let panel_points = (order / 4).max(2);
        let (gx, gw) = legendre_f64(panel_points);
        let (lx, lw) = laguerre_f64(order);

        let mut edges = vec![0.0];
        let mut k = -GRADED_FINE_LEVELS;
        loop {
            let e = scale * 2f64.powi(k);
            if e >= GRADED_TAIL_START {
                break;
            }
            edges.push(e);
            k += 1;
        }
        edges.push(GRADED_TAIL_START);

        let mut nodes = Vec::with_capacity((edges.len() - 1) * panel_points + lx.len());
        let mut weights = Vec::with_capacity(nodes.capacity());
        for pair in edges.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (x, w) in gx.iter().zip(gw.iter()) {
                let z = mid + half * x;
                nodes.push(z);
                weights.push(half * w * (-z).exp());
            }
        }
        let tail_mass = (-GRADED_TAIL_START).exp();
        for (x, w) in lx.iter().zip(lw.iter()) {
            nodes.push(GRADED_TAIL_START + x);
            weights.push(tail_mass * w);
        }
        Self::from_f64_parts(&nodes, &weights)
    }

    /// Casts an `f64` rule, dropping nodes whose weight underflows in `T`.
    fn from_f64_parts(nodes: &[f64], weights: &[f64]) -> Self {
        let (nodes, weights) = nodes
            .iter()
            .zip(weights)
            .filter_map(|(&x, &w)| {
                let w = T::from_f64(w)?;
                (w > T::zero()).then(|| (T::lit(x), w))
            })
            .unzip();
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Applies `rule` to `f`: `Σ w_i f(z_i) ≈ ∫_0^∞ f(z) e^{-z} dz`.
pub fn exp_weight_quadrature<T, F>(f: F, rule: &QuadratureRule<T>) -> Result<T>
where
    T: Real,
    F: Fn(T) -> T,
{
    let mut sum = T::zero();
    for (&z, &w) in rule.nodes.iter().zip(&rule.weights) {
        let v = f(z);
        if !v.is_finite() {
            return Err(Error::NonFinite {
                node: z.as_f64(),
                value: v.as_f64(),
            });
        }
        sum = sum + w * v;
    }
    Ok(sum)
}

/// Value of a self-checked expectation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckedExpectation<T = f64> {
    pub value: T,
    /// Relative difference between the default and doubled-order rules.
    pub disagreement: T,
    /// Whether the doubled-order value was returned.
    pub escalated: bool,
}

/// `E[f(Z)]`, `Z ~ Exp(1)`, on the graded rule at [`DEFAULT_ORDER`], checked against
/// [`ESCALATED_ORDER`].
pub fn expectation_checked<T, F>(f: F, scale: T) -> Result<CheckedExpectation<T>>
where
    T: Real,
    F: Fn(T) -> T,
{
    let base = exp_weight_quadrature(&f, &QuadratureRule::graded(scale, DEFAULT_ORDER))?;
    let fine = exp_weight_quadrature(&f, &QuadratureRule::graded(scale, ESCALATED_ORDER))?;
    let denom = fine.abs().max(T::min_positive_value());
    let disagreement = (base - fine).abs() / denom;
    let escalated = disagreement > T::lit(SELF_CHECK_TOLERANCE);
    Ok(CheckedExpectation {
        value: if escalated { fine } else { base },
        disagreement,
        escalated,
    })
}

/// Shorthand for [`expectation_checked`] returning only the value.
pub fn expectation<T, F>(f: F, scale: T) -> Result<T>
where
    T: Real,
    F: Fn(T) -> T,
{
    expectation_checked(f, scale).map(|e| e.value)
}

fn legendre_f64(n: usize) -> (Vec<f64>, Vec<f64>) {
    static CACHE: OnceLock<[(Vec<f64>, Vec<f64>); 2]> = OnceLock::new();
    let cached = CACHE.get_or_init(|| [gauss_legendre(16), gauss_legendre(32)]);
    match n {
        16 => cached[0].clone(),
        32 => cached[1].clone(),
        _ => gauss_legendre(n),
    }
}

fn laguerre_f64(n: usize) -> (Vec<f64>, Vec<f64>) {
    static CACHE: OnceLock<[(Vec<f64>, Vec<f64>); 2]> = OnceLock::new();
    let cached = CACHE.get_or_init(|| [gauss_laguerre(64), gauss_laguerre(128)]);
    match n {
        64 => cached[0].clone(),
        128 => cached[1].clone(),
        _ => gauss_laguerre(n),
    }
}

/// Gauss-Legendre nodes (ascending) and weights on `[-1, 1]`.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// `(L_n(z), L_{n-1}(z))` by the three-term recurrence.
fn laguerre_pair(n: usize, z: f64) -> (f64, f64) {
    let mut prev = 1.0;
    let mut cur = 1.0 - z;
    for j in 1..n {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 - z) * cur - jf * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// Gauss-Laguerre nodes (ascending) and weights for the weight `e^{-x}`.
fn gauss_laguerre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0f64; n];
    let mut w = vec![0.0f64; n];
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..n {
        z = match i {
            0 => 3.0 / (1.0 + 2.4 * nf),
            1 => z + 15.0 / (1.0 + 2.5 * nf),
            _ => {
                let ai = (i - 1) as f64;
                z + (1.0 + 2.55 * ai) / (1.9 * ai) * (z - x[i - 2])
            }
        };
        for _ in 0..200 {
            let (ln, ln1) = laguerre_pair(n, z);
            let derivative = nf * (ln - ln1) / z;
            let step = ln / derivative;
            z -= step;
            if step.abs() <= 1e-15 * z.abs() {
                break;
            }
        }
        x[i] = z;
        let (ln, ln1) = laguerre_pair(n, z);
        let next = ((2.0 * nf + 1.0 - z) * ln - nf * ln1) / (nf + 1.0);
        w[i] = z / ((nf + 1.0) * next).powi(2);
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laguerre_weights_sum_to_one() {
        for n in [4, 16, 64, 128] {
            let rule = QuadratureRule::<f64>::gauss_laguerre(n);
            assert_eq!(rule.len(), n);
            let s: f64 = rule.weights().iter().sum();
            assert!((s - 1.0).abs() < 1e-12, "n={n}: {s}");
            assert!(rule.nodes().windows(2).all(|p| p[1] > p[0]));
            assert!(rule.nodes()[0] > 0.0);
        }
    }

    #[test]
    fn graded_rule_is_a_probability_rule() {
        for scale in [1.0, 1e-2, 1e-5, 1e-9] {
            let rule = QuadratureRule::<f64>::graded(scale, DEFAULT_ORDER);
            let s: f64 = rule.weights().iter().sum();
            assert!((s - 1.0).abs() < 1e-12, "scale={scale}: {s}");
            assert!(rule.nodes().windows(2).all(|p| p[1] > p[0]));
            assert!(rule.nodes()[0] > 0.0);
        }
    }

    #[test]
    fn legendre_integrates_cubic() {
        let (x, w) = gauss_legendre(16);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * (x * x * x + x * x)).sum();
        assert!((s - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn non_finite_integrand_names_node() {
        let rule = QuadratureRule::<f64>::gauss_laguerre(8);
        let first = rule.nodes()[0];
        let err = exp_weight_quadrature(|z: f64| if z == first { f64::NAN } else { z }, &rule).unwrap_err();
        match err {
            Error::NonFinite { node, .. } => assert_eq!(node, first),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rule_validation() {
        assert!(QuadratureRule::new(vec![1.0, 0.5], vec![0.5, 0.5]).is_err());
        assert!(QuadratureRule::new(vec![0.5, 1.0], vec![0.5, -0.5]).is_err());
        assert!(QuadratureRule::new(vec![0.5], vec![0.5, 0.5]).is_err());
        assert!(QuadratureRule::new(vec![0.5, 1.0], vec![0.5, 0.5]).is_ok());
    }

    #[test]
    fn sharp_integrand_needs_grading() {
        // E[(1+100 Z)^-144] ≈ 7e-5; the plain rule misses it entirely.
        let f = |z: f64| (-144.0 * (100.0 * z).ln_1p()).exp();
        let plain = exp_weight_quadrature(f, &QuadratureRule::gauss_laguerre(64)).unwrap();
        let graded = expectation_checked(f, 1.0 / (100.0 * 145.0)).unwrap();
        assert!(plain < 1e-20);
        assert!(!graded.escalated);
        assert!((graded.value - 6.99e-5).abs() < 1e-6, "{}", graded.value);
    }

    #[test]
    fn single_precision_rule() {
        let rule = QuadratureRule::<f32>::gauss_laguerre(64);
        let s: f32 = rule.weights().iter().sum();
        assert!((s - 1.0).abs() < 1e-5);
        let m2 = exp_weight_quadrature(|z: f32| z * z, &rule).unwrap();
        assert!((m2 - 2.0).abs() < 1e-4);
    }
}
