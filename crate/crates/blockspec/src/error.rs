//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid alpha: {0}")]
    InvalidAlpha(String),

    #[error("invalid g: {0}")]
    InvalidG(String),

    #[error("invalid block count: D must be at least 1")]
    InvalidD,

    #[error("row index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("invalid block structure: {0}")]
    InvalidStructure(String),

    #[error("matrix has a non-positive entry; Perron-Frobenius iteration requires strictly positive entries")]
    NonPositiveMatrix,

    #[error("fixed-point iteration did not converge at t={t:e} after {iterations} iterations")]
    NoConvergence {
        t: f64,
        iterations: usize,
        last_h: Vec<f64>,
        last_hhat: Vec<f64>,
    },

    #[error("z = 0 queried outside the spectral support")]
    ZeroZOutsideSupport,

    #[error("solution has not converged")]
    NotConverged,

    #[error("solver failed at grid node {node}: {source}")]
    SolverFailure {
        node: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("eigensolver failed: {0}")]
    EigensolverFailure(String),

    #[error("config parse error at line {line}, column {column}: {message}")]
    ParseError {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid config field `{field}`: {message}")]
    ValidationError { field: String, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
