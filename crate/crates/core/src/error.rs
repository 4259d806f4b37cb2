use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular matrix: zero or missing pivot at row {row}")]
    Singular { row: usize },

    #[error("matrix is not lower triangular: entry above the diagonal in row {row}")]
    NotLowerTriangular { row: usize },

    #[error("capacity exceeded: n = {n} is above the dense limit {limit}")]
    Capacity { n: usize, limit: usize },

    #[error("power iteration did not converge: last estimates {previous} and {last}")]
    IterationLimit { previous: f64, last: f64 },

    #[error("invalid parameters: {0}")]
    Parameter(String),

    #[error("invalid splitting: {0}")]
    Splitting(String),

    #[error("non-finite value from nonlinear map at index {index}")]
    Evaluation { index: usize },

    #[error("iterate became non-finite at outer iteration {iteration}, index {index}")]
    Divergence { iteration: usize, index: usize },

    #[error(
        "coupling {coupling} breaks the uniqueness guarantee; use a coupling below {max_safe}"
    )]
    Generation { coupling: f64, max_safe: f64 },

    #[error("oracle failed: {0}")]
    Oracle(String),

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
