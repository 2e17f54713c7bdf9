use thiserror::Error;

/// Errors raised by the structure-learning toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller passed an argument that violates an operation's precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// Inserting an arc would close a directed cycle.
    #[error("arc {0} -> {1} would create a directed cycle")]
    Cycle(usize, usize),
    /// Input data or a file does not match the expected format.
    #[error("format error: {0}")]
    Format(String),
    /// Benchmark or generator parameters are inconsistent.
    #[error("configuration error: {0}")]
    Config(String),
    /// A broken internal invariant.
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
