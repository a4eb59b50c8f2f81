use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("quadrature did not converge: estimate {estimate:e}, error estimate {error:e}, requested tolerance {tolerance:e}")]
    QuadratureNonConvergence {
        estimate: f64,
        error: f64,
        tolerance: f64,
    },

    #[error("mixture is empty: every component weight is zero")]
    EmptyMixture,

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("kernel length scale {length:e} m needs a domain of at least {required:e} m along axis {axis}, found {domain:e} m")]
    KernelExceedsDomain {
        length: f64,
        required: f64,
        domain: f64,
        axis: usize,
    },

    #[error("correlation does not decay below {threshold} within the available lags (minimum value {minimum:.4})")]
    NonDecayingCorrelation { threshold: f64, minimum: f64 },

    #[error("malformed {what}: {reason}")]
    Format { what: &'static str, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

/// Rejects non-finite or non-positive values.
pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite and > 0, got {value}")))
    }
}

pub(crate) fn require_non_negative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite and >= 0, got {value}")))
    }
}
