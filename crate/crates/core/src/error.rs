use thiserror::Error;

/// Errors surfaced by the library. Statistical outcomes (rejections, blowup,
/// weight degeneracy) are reported in the result types instead.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("grid too small: {what} needs at least {required} collocation points, got {actual}")]
    GridTooSmall {
        what: String,
        required: usize,
        actual: usize,
    },

    #[error("size mismatch: expected {expected}, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("truncation mismatch: field has n_max = {field}, expected at most {limit}")]
    TruncationMismatch { field: usize, limit: usize },

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("shift is not a Cameron-Martin direction: mode {mode} has zero variance but a nonzero shift")]
    SingularShift { mode: i64 },

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
