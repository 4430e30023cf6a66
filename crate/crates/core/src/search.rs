//! One-dimensional root finding and unimodal search.

use crate::error::{Error, Result};
use crate::Real;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Result of a golden-section search.
#[derive(Debug, Clone, PartialEq)]
pub struct GoldenResult<T = f64> {
    pub x: T,
    pub value: T,
    pub iterations: usize,
    /// Bracket after every iteration.
    pub history: Vec<(T, T)>,
}

/// Golden-section search for the minimum of a unimodal `f` on `[lo, hi]`.
///
/// Stops once the bracket is narrower than `tol` or after `max_iter` iterations.
/// The end points are compared too, so a minimum at the boundary is returned as such.
pub fn golden_section_minimize<T, F>(f: F, lo: T, hi: T, tol: T, max_iter: usize) -> GoldenResult<T>
where
    T: Real,
    F: Fn(T) -> T,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let r = T::lit(INV_PHI);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut history = Vec::new();
    let mut iterations = 0;
    while (b - a) > tol && iterations < max_iter {
        iterations += 1;
        if lt(fc, fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
        history.push((a, b));
    }
    let mid = (a + b) * T::half();
    let mut best = (mid, f(mid));
    for cand in [(c, fc), (d, fd), (lo, f(lo)), (hi, f(hi))] {
        if lt(cand.1, best.1) {
            best = cand;
        }
    }
    GoldenResult {
        x: best.0,
        value: best.1,
        iterations,
        history,
    }
}

/// NaN-aware `a < b`: NaN compares as +∞.
fn lt<T: Real>(a: T, b: T) -> bool {
    match (a.is_nan(), b.is_nan()) {
        (false, true) => true,
        (true, _) => false,
        _ => a < b,
    }
}

/// Golden-section search for the maximum of `f`.
pub fn golden_section_maximize<T, F>(f: F, lo: T, hi: T, tol: T, max_iter: usize) -> GoldenResult<T>
where
    T: Real,
    F: Fn(T) -> T,
{
    let mut res = golden_section_minimize(|x| -f(x), lo, hi, tol, max_iter);
    res.value = -res.value;
    res
}

/// Result of a bracketed root search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root<T = f64> {
    pub x: T,
    pub iterations: usize,
}

/// Brent's method for a root of `f` in `[lo, hi]`; `f(lo)` and `f(hi)` must differ in sign.
pub fn brent_root<T, F>(f: F, lo: T, hi: T, xtol: T, max_iter: usize) -> Result<Root<T>>
where
    T: Real,
    F: Fn(T) -> T,
{
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == T::zero() {
        return Ok(Root { x: a, iterations: 0 });
    }
    if fb == T::zero() {
        return Ok(Root { x: b, iterations: 0 });
    }
    if (fa > T::zero()) == (fb > T::zero()) || fa.is_nan() || fb.is_nan() {
        return Err(Error::NotBracketed {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
        });
    }
    let two = T::two();
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for iter in 1..=max_iter {
        if (fb > T::zero()) == (fc > T::zero()) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = two * T::epsilon() * b.abs() + T::half() * xtol;
        let xm = T::half() * (c - b);
        if xm.abs() <= tol1 || fb == T::zero() {
            return Ok(Root { x: b, iterations: iter });
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = two * xm * s;
                q = T::one() - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (two * xm * qa * (qa - r) - (b - a) * (r - T::one()));
                q = (qa - T::one()) * (r - T::one()) * (s - T::one());
            }
            if p > T::zero() {
                q = -q;
            }
            p = p.abs();
            let min1 = T::lit(3.0) * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if two * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b = if d.abs() > tol1 { b + d } else { b + tol1 * xm.signum() };
        fb = f(b);
    }
    Ok(Root {
        x: b,
        iterations: max_iter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_minimum() {
        let r = golden_section_minimize(|x: f64| (x - 0.3).powi(2), -2.0, 5.0, 1e-10, 200);
        assert!((r.x - 0.3).abs() < 1e-6);
        assert!(!r.history.is_empty());
        let m = golden_section_maximize(|x: f64| -(x + 1.0).powi(2) + 4.0, -3.0, 3.0, 1e-10, 200);
        assert!((m.x + 1.0).abs() < 1e-6);
        assert!((m.value - 4.0).abs() < 1e-12);
    }

    #[test]
    fn golden_reports_boundary_minimum() {
        let r = golden_section_minimize(|x: f64| x, 1.0, 2.0, 1e-12, 200);
        assert_eq!(r.x, 1.0);
    }

    #[test]
    fn golden_treats_nan_as_worst() {
        let r = golden_section_minimize(
            |x: f64| if x < 0.5 { f64::NAN } else { (x - 0.7).powi(2) },
            0.0,
            1.0,
            1e-10,
            200,
        );
        assert!((r.x - 0.7).abs() < 1e-8);
    }

    #[test]
    fn brent_finds_cubic_root() {
        let r = brent_root(|x: f64| x * x * x - 2.0, 0.0, 2.0, 1e-14, 100).unwrap();
        assert!((r.x - 2f64.cbrt()).abs() < 1e-13);
        assert!(r.iterations < 50);
    }

    #[test]
    fn brent_rejects_unbracketed() {
        assert!(matches!(
            brent_root(|x: f64| x * x + 1.0, -1.0, 1.0, 1e-12, 100),
            Err(Error::NotBracketed { .. })
        ));
    }
}
