use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unsupported {field}: {value}")]
    Unsupported { field: &'static str, value: String },

    #[error("line {line}: dimension mismatch: expected {declared} entries, found {found}")]
    DimensionMismatch {
        line: usize,
        declared: usize,
        found: usize,
    },

    #[error("city index {index} out of range for instance with {dimension} cities")]
    CityOutOfRange { index: usize, dimension: usize },

    #[error("not a permutation of all cities: {0}")]
    NotAPermutation(String),

    #[error("instance has zero distance between distinct cities {0} and {1}")]
    ZeroDistance(usize, usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
