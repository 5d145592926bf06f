use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{malformed} of {total} rows in {path} are malformed (first problem: {first})")]
    TooManyMalformed {
        path: PathBuf,
        malformed: usize,
        total: usize,
        first: String,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dataset is empty: {0}")]
    EmptyDataset(String),

    #[error("no uncensored rows; the model cannot be fitted")]
    NoEvents,

    #[error("non-finite covariate at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },

    #[error("Hessian is singular at iteration {iteration}; use a penalizer > 0")]
    SingularHessian { iteration: usize },

    #[error("metric is undefined: {0}")]
    Undefined(String),

    #[error("serialization: {0}")]
    Serialization(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}
