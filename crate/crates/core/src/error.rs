use thiserror::Error;

/// Errors produced by the tent-space library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown point id `{0}`")]
    UnknownPoint(String),

    #[error("point index {index} out of range for a space of {len} points")]
    PointOutOfRange { index: usize, len: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("not a metric: {0}")]
    NotAMetric(String),

    #[error("non-positive weight {value} for point `{id}`")]
    InvalidWeight { id: String, value: f64 },

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("unknown check `{0}`")]
    UnknownCheck(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

/// Rejects non-positive or non-finite values.
pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite and > 0, got {value}")))
    }
}
