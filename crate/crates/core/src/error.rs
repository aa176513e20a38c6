use thiserror::Error;

/// Errors raised by the source model and its simulators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter or profile sample is outside its admissible range.
    #[error("invalid input: {field}: {reason}")]
    InvalidInput { field: String, reason: String },

    /// An operation was asked to divide by a quantity that must be non-zero.
    #[error("division domain error: {0}")]
    Domain(String),

    /// Discretization or solver settings violate a numerical constraint.
    #[error("configuration error: {0}")]
    Configuration(String),

    /// A truncated distribution or basis discards more weight than allowed.
    #[error("truncation error: {0}")]
    Truncation(String),

    /// An integrator lost more norm than the tolerance allows.
    #[error("numerical instability: {0}")]
    NumericalInstability(String),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidInput {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
