use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("edge list {0} contains no edges or nodes")]
    EmptyInput(PathBuf),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid privacy budget: {0}")]
    Budget(String),

    #[error("degree sequence is not graphical after repair: {repaired:?}")]
    NotGraphical { repaired: Vec<usize> },

    #[error("query {query} undefined: {reason}")]
    QueryUndefined { query: &'static str, reason: String },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("incomplete coverage for best counts: {0:?}")]
    IncompleteCoverage(Vec<String>),

    #[error("report error: {0}")]
    Report(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
