//! Gaussian tail probability and its inverse.

use crate::error::{domain, Result};
use crate::Real;

const MAX_TERMS: usize = 5_000;

/// Complementary error function for `x >= 0`.
fn erfc_nonneg<T: Real>(x: T) -> T {
    let eps = T::epsilon();
    if x < T::two() {
        // erf(x) = 2/sqrt(pi) e^{-x^2} sum_k (2x^2)^k x / (1*3*...*(2k+1)); all terms positive.
        let two_x2 = T::two() * x * x;
        let mut term = x;
        let mut sum = x;
        for k in 1..MAX_TERMS {
            term = term * two_x2 / T::from_usize_lossy(2 * k + 1);
            sum = sum + term;
            if term <= sum * eps {
                break;
            }
        }
        let erf = T::FRAC_2_SQRT_PI() * (-x * x).exp() * sum;
        T::one() - erf
    } else {
        // Continued fraction erfc(x) = e^{-x^2}/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))),
        // evaluated with the modified Lentz method.
        let tiny = T::min_positive_value() / eps;
        let mut f = x;
        let mut c = f;
        let mut d = T::zero();
        for k in 1..MAX_TERMS {
            let a = T::from_usize_lossy(k) * T::half();
            d = x + a * d;
            if d.abs() < tiny {
                d = tiny;
            }
            c = x + a / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = d.recip();
            let delta = c * d;
            f = f * delta;
            if (delta - T::one()).abs() <= eps {
                break;
            }
        }
        (-x * x).exp() * T::FRAC_2_SQRT_PI() * T::half() / f
    }
}

/// Complementary error function.
pub fn erfc<T: Real>(x: T) -> T {
    if x >= T::zero() {
        erfc_nonneg(x)
    } else {
        T::two() - erfc_nonneg(-x)
    }
}

/// Standard normal density.
pub fn normal_pdf<T: Real>(x: T) -> T {
    (-(x * x) * T::half()).exp() / (T::two() * T::PI()).sqrt()
}

/// Gaussian tail probability `Q(x) = P(N(0,1) > x)`.
pub fn gaussian_q<T: Real>(x: T) -> T {
    T::half() * erfc(x * T::FRAC_1_SQRT_2())
}

// Rational approximation of the normal quantile (relative error about 1.2e-9).
const A: [f64; 6] = [
    -3.969683028665376e+01,
    2.209460984245205e+02,
    -2.759285104469687e+02,
    1.38357751867269e+02,
    -3.066479806614716e+01,
    2.506628277459239e+00,
];
const B: [f64; 5] = [
    -5.447609879822406e+01,
    1.615858368580409e+02,
    -1.556989798598866e+02,
    6.680131188771972e+01,
    -1.328068155288572e+01,
];
const C: [f64; 6] = [
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e+00,
    -2.549732539343734e+00,
    4.374664141464968e+00,
    2.938163982698783e+00,
];
const D: [f64; 4] = [
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e+00,
    3.754408661907416e+00,
];
const P_LOW: f64 = 0.02425;

fn horner<T: Real>(coeffs: &[f64], x: T) -> T {
    coeffs.iter().fold(T::zero(), |acc, &c| acc * x + T::lit(c))
}

/// Initial estimate of the lower-tail normal quantile.
fn normal_quantile_estimate<T: Real>(p: T) -> T {
    let p_low = T::lit(P_LOW);
    if p < p_low {
        let q = (-T::two() * p.ln()).sqrt();
        horner(&C, q) / (horner(&D, q) * q + T::one())
    } else if p <= T::one() - p_low {
        let q = p - T::half();
        let r = q * q;
        horner(&A, r) * q / (horner(&B, r) * r + T::one())
    } else {
        let q = (-T::two() * (T::one() - p).ln()).sqrt();
        -horner(&C, q) / (horner(&D, q) * q + T::one())
    }
}

/// Inverse of [`gaussian_q`]: the `x` with `Q(x) = p`.
///
/// A rational initial guess is polished by two Newton steps on `Q`.
pub fn gaussian_q_inv<T: Real>(p: T) -> Result<T> {
    if !(p > T::zero() && p < T::one()) {
        return Err(domain("gaussian_q_inv requires p in (0,1)", p));
    }
    let mut x = -normal_quantile_estimate(p);
    for _ in 0..2 {
        let density = normal_pdf(x);
        if density <= T::zero() {
            break;
        }
        x = x + (gaussian_q(x) - p) / density;
    }
    Ok(x)
}
