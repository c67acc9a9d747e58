//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by estimators, solvers, and the experiment engine.
#[derive(Debug, Error)]
pub enum TailixError {
    /// A parameter is outside its admissible domain.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// An operation requires a nonempty sample.
    #[error("sample is empty")]
    EmptySample,

    /// An operation requires more observations than were supplied.
    #[error("insufficient data: required {required}, got {got}")]
    InsufficientData { required: usize, got: usize },

    /// The upper order statistics are degenerate (ties or zero spread),
    /// so the estimator would be infinite or undefined.
    #[error("degenerate tail: {0}")]
    DegenerateTail(String),

    /// A statistic came out non-finite or outside its admissible range.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Unknown experiment preset name.
    #[error("unknown preset `{0}` (expected table1..table6)")]
    UnknownPreset(String),

    /// Unknown serialization format.
    #[error("unknown format `{0}` (expected csv or json)")]
    UnknownFormat(String),
}

pub type Result<T> = std::result::Result<T, TailixError>;

impl TailixError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        TailixError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
