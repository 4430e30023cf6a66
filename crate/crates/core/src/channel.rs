//! Finite-blocklength achievable rate over quasi-static Rayleigh block fading.
//!
//! The rate for fading power `z` at SNR `ρ` is
//! `r = log2(1+ρz) - Q⁻¹(ε) log2(e)/√n · √(1 - (1+ρz)^-2)` bits per channel use.

use crate::error::{domain, Error, Result};
use crate::search;
use crate::specfun::{self, Estimate, RandomStream};
use crate::Real;

/// Fading law of the squared envelope `Z = |h|^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fading {
    /// Rayleigh fading, `Z ~ Exp(1)`.
    #[default]
    RayleighUnitMean,
}

/// Blocklength and fading law of the link.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelConfig {
    blocklength: u32,
    fading: Fading,
}

impl ChannelConfig {
    /// Rayleigh channel with `n >= 2` symbols per packet.
    pub fn new(blocklength: u32) -> Result<Self> {
        Self::with_fading(blocklength, Fading::RayleighUnitMean)
    }

    pub fn with_fading(blocklength: u32, fading: Fading) -> Result<Self> {
        if blocklength < 2 {
            return Err(Error::Domain {
                what: "blocklength n must be at least 2",
                value: f64::from(blocklength),
            });
        }
        Ok(Self { blocklength, fading })
    }

    pub fn blocklength(&self) -> u32 {
        self.blocklength
    }

    pub fn fading(&self) -> Fading {
        self.fading
    }

    pub(crate) fn n<T: Real>(&self) -> T {
        T::lit(f64::from(self.blocklength))
    }
}

/// Candidate `(ρ, ε, θ)`: linear SNR, decoding error probability, delay exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint<T = f64> {
    pub rho: T,
    pub epsilon: T,
    pub theta: T,
}

impl<T: Real> OperatingPoint<T> {
    pub fn new(rho: T, epsilon: T, theta: T) -> Result<Self> {
        if !(rho >= T::zero()) || !rho.is_finite() {
            return Err(domain("rho must be a finite nonnegative SNR", rho));
        }
        if !(epsilon > T::zero() && epsilon < T::one()) {
            return Err(domain("epsilon must lie in (0,1)", epsilon));
        }
        if !(theta >= T::zero()) || !theta.is_finite() {
            return Err(domain("theta must be finite and nonnegative", theta));
        }
        Ok(Self { rho, epsilon, theta })
    }
}

/// How an expectation over the fading is evaluated.
#[derive(Debug)]
pub enum ExpectationMethod<'a> {
    Quadrature,
    MonteCarlo { stream: &'a mut RandomStream, count: usize },
}

/// Dispersion coefficient `Q⁻¹(ε) log2(e) / √n`.
pub fn dispersion_coefficient<T: Real>(cfg: &ChannelConfig, epsilon: T) -> Result<T> {
    let q = specfun::gaussian_q_inv(epsilon)?;
    Ok(q * T::LOG2_E() / cfg.n::<T>().sqrt())
}

/// `√(1 - (1+x)^-2)`, written to stay accurate as `x → 0`.
#[inline]
pub(crate) fn dispersion_shape<T: Real>(x: T) -> T {
    (x * (T::two() + x)).sqrt() / (T::one() + x)
}

#[inline]
fn rate_from_snr<T: Real>(x: T, coeff: T) -> T {
    x.ln_1p() * T::LOG2_E() - coeff * dispersion_shape(x)
}

/// Achievable rate in bpcu at fading power `z`; with `clamp` the result is `max(r, 0)`.
pub fn achievable_rate<T: Real>(cfg: &ChannelConfig, rho: T, z: T, epsilon: T, clamp: bool) -> Result<T> {
    if !(z >= T::zero()) {
        return Err(domain("fading power z must be nonnegative", z));
    }
    if !(rho >= T::zero()) {
        return Err(domain("rho must be nonnegative", rho));
    }
    let r = rate_from_snr(rho * z, dispersion_coefficient(cfg, epsilon)?);
    Ok(if clamp { r.max(T::zero()) } else { r })
}

/// Positive root of `log2(1+x) = c·√(1-(1+x)^-2)` for `c > 0`.
///
/// The rate is negative on `(0, x0)` and increasing beyond.
fn zero_rate_snr<T: Real>(coeff: T) -> Result<T> {
    let h = |x: T| rate_from_snr(x, coeff);
    // Small-x balance x/ln2 = c√(2x) gives the first guess.
    let guess = (T::two() * (coeff * T::LN_2()).powi(2)).max(T::lit(1e-300));
    let (mut lo, mut hi) = (guess, guess);
    if h(guess) < T::zero() {
        while h(hi) < T::zero() {
            lo = hi;
            hi = hi * T::two();
        }
    } else {
        while h(lo) >= T::zero() && lo > T::lit(1e-300) {
            hi = lo;
            lo = lo * T::half();
        }
    }
    let root = search::brent_root(h, lo, hi, hi * T::lit(1e-15), 200)?;
    Ok(root.x)
}

/// `E[max(r, 0)]` over the fading, in bpcu.
pub fn expected_rate<T: Real>(cfg: &ChannelConfig, rho: T, epsilon: T) -> Result<T> {
    if !(rho >= T::zero()) || !rho.is_finite() {
        return Err(domain("rho must be a finite nonnegative SNR", rho));
    }
    let coeff = dispersion_coefficient(cfg, epsilon)?;
    if rho == T::zero() {
        return Ok(T::zero());
    }
    match cfg.fading {
        Fading::RayleighUnitMean => {
            let z0 = if coeff > T::zero() {
                zero_rate_snr(coeff)? / rho
            } else {
                T::zero()
            };
            // ∫_{z0}^∞ r(z) e^{-z} dz = e^{-z0} E[r(z0 + Z)]
            let scale = ((T::one() + rho * z0) / rho).min(T::one());
            let shifted = specfun::expectation(|u: T| rate_from_snr(rho * (z0 + u), coeff).max(T::zero()), scale)?;
            Ok((-z0).exp() * shifted)
        }
    }
}

/// `E[log2(1+ρZ)]`, the mean rate without the dispersion term.
pub fn shannon_expected_rate<T: Real>(rho: T) -> Result<T> {
    if !(rho >= T::zero()) || !rho.is_finite() {
        return Err(domain("rho must be a finite nonnegative SNR", rho));
    }
    if rho == T::zero() {
        return Ok(T::zero());
    }
    specfun::expectation(|z: T| (rho * z).ln_1p() * T::LOG2_E(), rho.recip().min(T::one()))
}

/// `ψ(ρ,θ,ε) = E[ε + (1-ε) e^{-nθ r(Z)}]` with the unclamped rate.
///
/// Monte Carlo estimates carry their standard error; quadrature reports zero.
pub fn rate_functional_expectation<T: Real>(
    cfg: &ChannelConfig,
    point: &OperatingPoint<T>,
    method: ExpectationMethod<'_>,
) -> Result<Estimate<T>> {
    let OperatingPoint { rho, epsilon, theta } = *point;
    if !(theta > T::zero()) {
        return Err(domain("psi requires theta > 0", theta));
    }
    let coeff = dispersion_coefficient(cfg, epsilon)?;
    let n = cfg.n::<T>();
    // e^{-nθr} = (1+ρz)^α e^{βγ}
    let alpha = -theta * n * T::LOG2_E();
    let beta = theta * n * coeff;
    let integrand = |z: T| {
        let x = rho * z;
        (alpha * x.ln_1p() + beta * dispersion_shape(x)).exp()
    };
    let mix = |e: T| epsilon + (T::one() - epsilon) * e;

    match (cfg.fading, method) {
        (Fading::RayleighUnitMean, ExpectationMethod::Quadrature) => {
            if rho == T::zero() {
                return Ok(Estimate {
                    mean: T::one(),
                    std_error: T::zero(),
                    samples: 0,
                });
            }
            let scale = (rho * (T::one() + alpha.abs())).recip();
            let e = specfun::expectation(integrand, scale)?;
            Ok(Estimate {
                mean: mix(e),
                std_error: T::zero(),
                samples: 0,
            })
        }
        (Fading::RayleighUnitMean, ExpectationMethod::MonteCarlo { stream, count }) => {
            if count == 0 {
                return Err(Error::Domain {
                    what: "Monte Carlo needs at least one sample",
                    value: 0.0,
                });
            }
            let est = specfun::monte_carlo_mean(integrand, stream, count);
            Ok(Estimate {
                mean: mix(est.mean),
                std_error: (T::one() - epsilon) * est.std_error,
                samples: count,
            })
        }
    }
}
