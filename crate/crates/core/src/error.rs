use thiserror::Error;

/// Errors produced by the core library.
#[derive(Debug, Error)]
pub enum CoreError {
    /// A caller-supplied value violates a precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// A matrix factorization or related numeric step failed even after
    /// jitter escalation.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    /// Input data is structurally valid but inconsistent with the problem
    /// definition (e.g. a required lattice point is absent).
    #[error("data error: {0}")]
    DataError(String),
    /// A file could not be parsed; `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },
    /// The robustness measure has no known width function q(a).
    #[error("measure has no width function: {0}")]
    NoWidthFunction(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, CoreError>;
