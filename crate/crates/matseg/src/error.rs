use std::path::PathBuf;

use thiserror::Error;

/// Errors from the front end: file handling plus anything the core library
/// reports.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] matseg_core::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn parse(line: usize, reason: impl Into<String>) -> Self {
        Error::Parse { line, reason: reason.into() }
    }

    /// Process exit code: 2 for usage errors, 3 for bad data, 4 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        use matseg_core::Error as C;
        match self {
            Error::Usage(_) => 2,
            Error::Io { .. } | Error::Parse { .. } => 3,
            Error::Core(C::InvalidInput(_) | C::DegenerateColumn(_) | C::SingleColumn | C::ResourceLimit { .. }) => 3,
            Error::Core(_) => 4,
        }
    }

    /// Short machine-readable name of the error kind.
    pub fn kind(&self) -> &'static str {
        use matseg_core::Error as C;
        match self {
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::Usage(_) => "usage",
            Error::Core(e) => match e {
                C::InvalidInput(_) => "invalid_input",
                C::NumericalFailure(_) => "numerical_failure",
                C::DegenerateCovariance => "degenerate_covariance",
                C::DegenerateColumn(_) => "degenerate_column",
                C::DegenerateVariance { .. } => "degenerate_variance",
                C::SingleColumn => "single_column",
                C::ResourceLimit { .. } => "resource_limit",
                C::InvalidState(_) => "invalid_state",
            },
        }
    }
}
