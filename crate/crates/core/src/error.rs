use thiserror::Error;

/// Errors produced by the metric, fitting and ingestion routines.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A metric was requested for a collection with no individuals.
    #[error("empty collection")]
    EmptyCollection,
    /// Entropy efficiency is undefined because the average energy is zero.
    #[error("zero average energy")]
    ZeroEnergy,
    /// The input has no spread to fit or correlate.
    #[error("degenerate input: {0}")]
    Degenerate(String),
    /// An iterative solver did not reach its tolerance.
    #[error("no convergence after {iterations} iterations")]
    Convergence { iterations: usize },
    /// A malformed input record (strict parsing only).
    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
