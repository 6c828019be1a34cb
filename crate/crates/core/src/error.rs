use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} coordinates, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unknown {kind} identifier `{id}`")]
    UnknownIdentifier { kind: &'static str, id: String },

    #[error("{gauge} gauge is not a homogeneous norm on {group}")]
    UnsupportedGauge { gauge: &'static str, group: &'static str },

    #[error("non-finite integrand value encountered in {context}")]
    NonFinite { context: &'static str },

    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("extrapolation did not converge: {0}")]
    NonConvergent(String),

    #[error("growth condition (L) violated: {0}")]
    GrowthCondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
