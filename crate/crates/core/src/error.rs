use serde::Serialize;
use thiserror::Error;

/// Errors raised by the library. Every variant carries enough context to
/// render a structured diagnostic.
#[derive(Debug, Clone, Error, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LiouvilleError {
    #[error("domain error: {message}")]
    Domain { message: String },

    #[error("pole of {factor} at {location}")]
    Pole { factor: String, location: String },

    #[error("branch junction: {message}")]
    Branch { message: String },

    #[error("quadrature did not converge: {message} (estimate {estimate:e}, error {error:e}, intervals {intervals})")]
    NonConvergence {
        message: String,
        estimate: f64,
        error: f64,
        intervals: usize,
    },

    #[error(
        "Gram matrix at level {level} is singular or ill-conditioned (condition {condition:e})"
    )]
    SingularGram { level: usize, condition: f64 },

    #[error("invalid decay rate {decay_rate}")]
    InvalidDecay { decay_rate: f64 },
}

impl LiouvilleError {
    pub fn domain(message: impl Into<String>) -> Self {
        LiouvilleError::Domain {
            message: message.into(),
        }
    }

    pub fn pole(factor: impl Into<String>, location: impl std::fmt::Display) -> Self {
        LiouvilleError::Pole {
            factor: factor.into(),
            location: location.to_string(),
        }
    }

    /// True for errors caused by invalid input rather than numerical failure.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            LiouvilleError::Domain { .. }
                | LiouvilleError::Pole { .. }
                | LiouvilleError::Branch { .. }
                | LiouvilleError::InvalidDecay { .. }
                | LiouvilleError::SingularGram { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, LiouvilleError>;
