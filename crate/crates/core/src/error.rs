use alloc::string::String;

/// Errors produced by the segmentation pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// The covariance matrix has no positive eigenvalue.
    #[error("degenerate covariance: largest eigenvalue is not positive")]
    DegenerateCovariance,

    /// A column of the series has zero sample variance.
    #[error("column {0} has zero variance")]
    DegenerateColumn(usize),

    /// A transformed column has non-positive (thresholded) variance in a row.
    #[error("transformed column {column} has non-positive variance in row {row}")]
    DegenerateVariance { column: usize, row: usize },

    /// The series has a single column, so there is nothing to segment.
    #[error("series has a single column")]
    SingleColumn,

    #[error("resource limit exceeded: {entries} entries requested")]
    ResourceLimit { entries: u64 },

    #[error("invalid state: {0}")]
    InvalidState(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
