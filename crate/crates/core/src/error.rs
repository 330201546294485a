use thiserror::Error;

/// Errors raised by lattice construction, evolution and validation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum WalkError {
    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("plan/field mismatch: {0}")]
    Mismatch(String),

    #[error("dense operator would have dimension {dim}, above the limit of {limit}")]
    TooLarge { dim: usize, limit: usize },

    #[error("reference solver unstable: norm drifted by {drift:e} at t = {time}")]
    Unstable { drift: f64, time: f64 },

    #[error("generator extraction did not converge: residuals {residuals:?}")]
    ExtractionFailed { residuals: Vec<f64> },
}

pub type Result<T> = std::result::Result<T, WalkError>;

pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> WalkError {
    WalkError::Parameter {
        name,
        reason: reason.into(),
    }
}
