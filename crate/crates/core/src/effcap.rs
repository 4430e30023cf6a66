//! Effective capacity, its closed-form approximation and effective energy efficiency.
//!
//! The closed form replaces `E[e^{-nθr}]` by
//! `𝒥 = T1·E[(1+ρZ)^α] − T2·E[(1+ρZ)^(α−2)]` with `α = −θn/ln 2`,
//! `β = θ√n·Q⁻¹(ε)·log2(e)`, `T2 = β²/2 + β` and `T1 = T2 + 1`. Each expectation is
//! `e^{1/ρ}ρ^a Γ(a+1, 1/ρ)` and is evaluated through
//! [`scaled_gamma_combo`](crate::specfun::scaled_gamma_combo).

use crate::channel::{self, ChannelConfig, ExpectationMethod, OperatingPoint};
use crate::error::{domain, Error, Result};
use crate::specfun;
use crate::Real;

/// What drives the delay exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DelayTarget<T = f64> {
    /// θ given directly (per symbol).
    Exponent(T),
    /// Delay bound `δ` in symbol periods with outage probability `Λ`; θ follows from
    /// `P_nb e^{−θλδ} = Λ`.
    Outage { delta: T, lambda_out: T },
}

/// Delay requirement and arrival rate `λ` (bpcu).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QosConfig<T = f64> {
    pub target: DelayTarget<T>,
    pub arrival_rate: T,
}

impl<T: Real> QosConfig<T> {
    pub fn with_exponent(theta: T, arrival_rate: T) -> Result<Self> {
        Self::new(DelayTarget::Exponent(theta), arrival_rate)
    }

    pub fn with_outage(delta: T, lambda_out: T, arrival_rate: T) -> Result<Self> {
        Self::new(DelayTarget::Outage { delta, lambda_out }, arrival_rate)
    }

    pub fn new(target: DelayTarget<T>, arrival_rate: T) -> Result<Self> {
        if !(arrival_rate > T::zero()) || !arrival_rate.is_finite() {
            return Err(domain("arrival rate lambda must be positive", arrival_rate));
        }
        match target {
            DelayTarget::Exponent(theta) => {
                if !(theta >= T::zero()) || !theta.is_finite() {
                    return Err(domain("theta must be finite and nonnegative", theta));
                }
            }
            DelayTarget::Outage { delta, lambda_out } => {
                if !(delta > T::zero()) || !delta.is_finite() {
                    return Err(domain("delta must be positive", delta));
                }
                if !(lambda_out > T::zero() && lambda_out < T::one()) {
                    return Err(domain("lambda_out must lie in (0,1)", lambda_out));
                }
            }
        }
        Ok(Self { target, arrival_rate })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BufferMode {
    /// The transmitter always has data: `P_nb = 1`.
    #[default]
    FullBuffer,
    /// The amplifier draws power only while the buffer is non-empty: `P_nb = λ / E[r]`.
    EmptyBufferAware,
}

/// Linear power model `P_nb ζρ + P_c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerModelConfig<T = f64> {
    pub zeta: T,
    pub p_c: T,
    pub buffer_mode: BufferMode,
}

impl<T: Real> PowerModelConfig<T> {
    pub fn new(zeta: T, p_c: T, buffer_mode: BufferMode) -> Result<Self> {
        if !(zeta > T::zero()) || !zeta.is_finite() {
            return Err(domain("zeta must be positive", zeta));
        }
        if !(p_c >= T::zero()) || !p_c.is_finite() {
            return Err(domain("p_c must be nonnegative", p_c));
        }
        Ok(Self { zeta, p_c, buffer_mode })
    }
}

/// How the effective capacity is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EcModel {
    /// Quadrature of `E[e^{-nθr}]` with the finite-blocklength rate.
    Oracle,
    /// The closed form `ε + (1−ε)𝒥`.
    #[default]
    ClosedForm,
    /// Dispersion term removed (`β = 0`), ε kept in the mixture; exact.
    Shannon,
}

impl EcModel {
    pub fn is_shannon(self) -> bool {
        matches!(self, EcModel::Shannon)
    }
}

/// Intermediate quantities of the closed form at one `(n, ρ, θ, ε)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxTerms<T = f64> {
    pub alpha: T,
    pub beta: T,
    pub t1: T,
    pub t2: T,
    /// `E[(1+ρZ)^α]`.
    pub combo_alpha: T,
    /// `E[(1+ρZ)^(α−2)]`.
    pub combo_alpha_minus_2: T,
    pub j_value: T,
    pub j_prime: T,
}

impl<T: Real> ApproxTerms<T> {
    /// `ε + (1−ε)𝒥`.
    pub fn psi(&self, epsilon: T) -> T {
        epsilon + (T::one() - epsilon) * self.j_value
    }
}

pub(crate) fn alpha<T: Real>(cfg: &ChannelConfig, theta: T) -> T {
    -theta * cfg.n::<T>() * T::LOG2_E()
}

pub(crate) fn beta<T: Real>(cfg: &ChannelConfig, theta: T, epsilon: T) -> Result<T> {
    Ok(theta * cfg.n::<T>() * channel::dispersion_coefficient(cfg, epsilon)?)
}

/// `T2 = β²/2 + β`.
pub(crate) fn t2_of<T: Real>(beta: T) -> T {
    beta * beta * T::half() + beta
}

/// The ε-independent expectations `(E[(1+ρZ)^α], E[(1+ρZ)^(α−2)])`.
pub(crate) fn combos<T: Real>(cfg: &ChannelConfig, rho: T, theta: T) -> Result<(T, T)> {
    let a = alpha(cfg, theta);
    Ok((
        specfun::scaled_gamma_combo(a, rho)?,
        specfun::scaled_gamma_combo(a - T::two(), rho)?,
    ))
}

/// Closed-form `𝒥` and its ρ-derivative.
pub fn j_function<T: Real>(cfg: &ChannelConfig, rho: T, theta: T, epsilon: T) -> Result<ApproxTerms<T>> {
    if !(rho > T::zero()) {
        return Err(domain("closed form requires rho > 0", rho));
    }
    if !(theta > T::zero()) {
        return Err(domain("closed form requires theta > 0", theta));
    }
    let (c0, c2) = combos(cfg, rho, theta)?;
    terms_from_combos(cfg, rho, theta, epsilon, c0, c2)
}

pub(crate) fn terms_from_combos<T: Real>(
    cfg: &ChannelConfig,
    rho: T,
    theta: T,
    epsilon: T,
    c0: T,
    c2: T,
) -> Result<ApproxTerms<T>> {
    let alpha = alpha(cfg, theta);
    let beta = beta(cfg, theta, epsilon)?;
    let t2 = t2_of(beta);
    let t1 = t2 + T::one();
    let j_value = t1 * c0 - t2 * c2;
    // d𝒥/dρ = −ρ⁻²[(1 − αρ)𝒥 − (T1 − T2) − 2T2 ρ E[(1+ρZ)^(α−2)]]
    let j_prime = -(rho * rho).recip() * ((T::one() - alpha * rho) * j_value - (t1 - t2) - T::two() * t2 * rho * c2);
    Ok(ApproxTerms {
        alpha,
        beta,
        t1,
        t2,
        combo_alpha: c0,
        combo_alpha_minus_2: c2,
        j_value,
        j_prime,
    })
}

/// `d𝒥/dρ`.
pub fn j_prime<T: Real>(cfg: &ChannelConfig, rho: T, theta: T, epsilon: T) -> Result<T> {
    Ok(j_function(cfg, rho, theta, epsilon)?.j_prime)
}

/// Probability `e^{−θ·C·δ}` that the delay exceeds `δ`.
pub fn delay_outage<T: Real>(theta: T, ec: T, delta: T) -> T {
    (-theta * ec * delta).exp()
}

/// `ψ` under the chosen model.
pub fn psi<T: Real>(cfg: &ChannelConfig, point: &OperatingPoint<T>, model: EcModel) -> Result<T> {
    let OperatingPoint { rho, epsilon, theta } = *point;
    if rho == T::zero() {
        return Ok(T::one());
    }
    match model {
        EcModel::Oracle => Ok(channel::rate_functional_expectation(cfg, point, ExpectationMethod::Quadrature)?.mean),
        EcModel::ClosedForm => Ok(j_function(cfg, rho, theta, epsilon)?.psi(epsilon)),
        EcModel::Shannon => {
            if !(theta > T::zero()) {
                return Err(domain("closed form requires theta > 0", theta));
            }
            let c0 = specfun::scaled_gamma_combo(alpha(cfg, theta), rho)?;
            Ok(epsilon + (T::one() - epsilon) * c0)
        }
    }
}

/// Effective capacity `−ln ψ / (nθ)` in bpcu.
pub fn effective_capacity<T: Real>(cfg: &ChannelConfig, point: &OperatingPoint<T>, model: EcModel) -> Result<T> {
    if !(point.theta > T::zero()) {
        return Err(domain("effective capacity requires theta > 0", point.theta));
    }
    let psi = psi(cfg, point, model)?;
    ec_from_psi(cfg, psi, point.theta)
}

pub(crate) fn ec_from_psi<T: Real>(cfg: &ChannelConfig, psi: T, theta: T) -> Result<T> {
    if !(psi > T::zero()) || !psi.is_finite() {
        return Err(Error::NonFiniteResult("psi must be positive"));
    }
    Ok(-psi.ln() / (cfg.n::<T>() * theta))
}

/// Mean service rate used by the buffer model.
pub fn mean_rate<T: Real>(cfg: &ChannelConfig, rho: T, epsilon: T, model: EcModel) -> Result<T> {
    if model.is_shannon() {
        channel::shannon_expected_rate(rho)
    } else {
        channel::expected_rate(cfg, rho, epsilon)
    }
}

/// Non-empty-buffer probability `λ / E[r]`; `Err(Infeasible)` when it exceeds one.
pub fn non_empty_probability<T: Real>(arrival_rate: T, mean_rate: T) -> Result<T> {
    if !(mean_rate >= arrival_rate) || !(mean_rate > T::zero()) {
        return Err(Error::Infeasible(format!(
            "arrival rate {} exceeds mean service rate {:.6e}: queue unstable",
            arrival_rate.as_f64(),
            mean_rate.as_f64()
        )));
    }
    Ok(arrival_rate / mean_rate)
}

/// Everything computed on the way to an EEE value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Efficiency<T = f64> {
    pub eee: T,
    pub ec: T,
    pub p_nb: T,
    /// `E[r]`; only evaluated for the empty-buffer model.
    pub mean_rate: Option<T>,
    pub power: T,
}

/// Effective energy efficiency with all intermediate values.
///
/// At `ρ = 0` the efficiency is its limit, zero, for both buffer models.
pub fn evaluate<T: Real>(
    cfg: &ChannelConfig,
    qos: &QosConfig<T>,
    pm: &PowerModelConfig<T>,
    point: &OperatingPoint<T>,
    model: EcModel,
) -> Result<Efficiency<T>> {
    if point.rho == T::zero() {
        return Ok(Efficiency {
            eee: T::zero(),
            ec: T::zero(),
            p_nb: T::one(),
            mean_rate: None,
            power: pm.p_c,
        });
    }
    let (p_nb, mean_rate) = match pm.buffer_mode {
        BufferMode::FullBuffer => (T::one(), None),
        BufferMode::EmptyBufferAware => {
            let m = mean_rate(cfg, point.rho, point.epsilon, model)?;
            (non_empty_probability(qos.arrival_rate, m)?, Some(m))
        }
    };
    let ec = effective_capacity(cfg, point, model)?;
    let power = p_nb * pm.zeta * point.rho + pm.p_c;
    Ok(Efficiency {
        eee: ec / power,
        ec,
        p_nb,
        mean_rate,
        power,
    })
}

/// Effective energy efficiency in bpcu per Watt.
pub fn eee<T: Real>(
    cfg: &ChannelConfig,
    qos: &QosConfig<T>,
    pm: &PowerModelConfig<T>,
    point: &OperatingPoint<T>,
    method: EcModel,
) -> Result<T> {
    Ok(evaluate(cfg, qos, pm, point, method)?.eee)
}

/// EEE of the same pipeline with the dispersion term removed.
pub fn shannon_baseline_eee<T: Real>(
    cfg: &ChannelConfig,
    qos: &QosConfig<T>,
    pm: &PowerModelConfig<T>,
    point: &OperatingPoint<T>,
) -> Result<T> {
    eee(cfg, qos, pm, point, EcModel::Shannon)
}
