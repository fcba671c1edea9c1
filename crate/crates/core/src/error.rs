use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    /// A bank strategy or system violates one of its defining constraints.
    /// `constraint` names the violated condition in words.
    #[error("validation failed ({constraint}): {detail}")]
    Validation { constraint: String, detail: String },

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("certificate check failed: {0}")]
    Certificate(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn validation(constraint: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Validation {
            constraint: constraint.into(),
            detail: detail.into(),
        }
    }

    /// True for errors that stem from malformed or invalid user input rather
    /// than from a numerical failure.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::Invalid(_)
                | Error::Validation { .. }
                | Error::Unsupported(_)
        )
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
