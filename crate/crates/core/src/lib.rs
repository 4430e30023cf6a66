// Negated comparisons are used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod effcap;
pub mod error;
pub mod optimize;
pub mod scalar;
pub mod search;
pub mod specfun;

pub use error::{Error, Result};
pub use scalar::{db_to_linear, linear_to_db, Real};

pub type ChannelConfigF64 = channel::ChannelConfig;
pub type OperatingPointF64 = channel::OperatingPoint<f64>;
pub type QosConfigF64 = effcap::QosConfig<f64>;
pub type PowerModelConfigF64 = effcap::PowerModelConfig<f64>;
pub type ApproxTermsF64 = effcap::ApproxTerms<f64>;
pub type SolveConstraintsF64 = optimize::SolveConstraints<f64>;
pub type SolveResultF64 = optimize::SolveResult<f64>;
pub type EstimateF64 = specfun::Estimate<f64>;
