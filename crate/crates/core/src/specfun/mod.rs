//! Special functions, quadrature and random sampling used by the link model.

pub mod erf;
pub mod gamma;
pub mod quadrature;
pub mod random;

pub use erf::{erfc, gaussian_q, gaussian_q_inv, normal_pdf};
pub use gamma::{ln_gamma, scaled_gamma_combo, upper_inc_gamma};
pub use quadrature::{exp_weight_quadrature, expectation, expectation_checked, CheckedExpectation, QuadratureRule};
pub use random::{monte_carlo_mean, sample_exponential, Estimate, RandomStream, DEFAULT_SAMPLES, DEFAULT_SEED};
