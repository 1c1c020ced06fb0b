use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows} x {cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("adjacency not symmetric at ({i}, {j}): {a} vs {b}")]
    Asymmetric { i: usize, j: usize, a: f64, b: f64 },

    #[error("negative adjacency entry at ({i}, {j}): {value}")]
    NegativeWeight { i: usize, j: usize, value: f64 },

    #[error("non-finite adjacency entry at ({i}, {j})")]
    NonFiniteWeight { i: usize, j: usize },

    #[error("nonzero adjacency diagonal at ({i}, {i}): {value}")]
    NonzeroDiagonal { i: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("graph has no edges")]
    NoEdges,

    #[error(
        "power iteration did not converge after {iterations} iterations \
         (last Rayleigh quotient {last_estimate})"
    )]
    NoConvergence { iterations: usize, last_estimate: f64 },

    #[error("eigenpair count {k} out of range 1..={n}")]
    EigenCountOutOfRange { k: usize, n: usize },

    #[error("sampling mask selects {m} of {n} nodes")]
    BadMaskSize { m: usize, n: usize },

    #[error("invalid parameter {name}: {message}")]
    InvalidParameter { name: &'static str, message: String },

    #[error("solver diverged at iteration {iteration}")]
    Diverged { iteration: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("probability entry at ({i}, {j}) outside [0, 1]: {value}")]
    BadProbability { i: usize, j: usize, value: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid experiment spec: {0}")]
    Spec(String),

    #[error("run {run} failed: {source}")]
    RunFailed {
        run: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
