use thiserror::Error;

/// Errors raised by the numerical layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {what} (got {value})")]
    Domain { what: &'static str, value: f64 },

    /// The exact result is finite but exceeds the range of the scalar type.
    #[error("overflow: {0}")]
    Overflow(&'static str),

    /// An integrand returned a non-finite value at a quadrature node.
    #[error("non-finite integrand value {value} at node z = {node}")]
    NonFinite { node: f64, value: f64 },

    /// A computed quantity that must be finite is not.
    #[error("non-finite result: {0}")]
    NonFiniteResult(&'static str),

    /// The requested configuration has no valid operating point.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// The objective is numerically flat over the search bracket.
    #[error("degenerate parameters: {0}")]
    Degenerate(String),

    /// A bracketing method was given an interval without a sign change.
    #[error("no sign change in [{lo}, {hi}]")]
    NotBracketed { lo: f64, hi: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T: crate::Real>(what: &'static str, value: T) -> Error {
    Error::Domain {
        what,
        value: value.as_f64(),
    }
}
