use thiserror::Error;

/// Errors produced by the estimators, the reference copulas and the
/// benchmark harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("value {value} lies outside the unit interval")]
    Domain { value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degree {degree} exceeds the supported maximum of {max}")]
    DegreeTooLarge { degree: usize, max: usize },

    #[error("non-finite entry at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },

    #[error("sample too small: need at least {min} observations, got {got}")]
    SampleTooSmall { min: usize, got: usize },

    #[error("column {column} out of range for dimension {dim}")]
    ColumnOutOfRange { column: usize, dim: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_unit(value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Domain { value })
    }
}
