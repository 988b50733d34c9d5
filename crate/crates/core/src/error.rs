use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("perturbation budget violated: {0}")]
    BudgetViolation(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular support: {0}")]
    SingularSupport(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("numerical consistency failure: {0}")]
    Consistency(String),

    #[error("decomposition failed to converge: {0}")]
    Convergence(String),

    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    Validation(Vec<String>),

    #[error("could not parse {what}: {message}")]
    Parse { what: String, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad input rather than by numerics.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Consistency(_) | Error::Convergence(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
