use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input violates a mathematical precondition (dimensions, inclusions, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// A covariance or metric that must be positive definite is not.
    #[error("degenerate: {0}")]
    Degenerate(String),
    /// Missing or inconsistent configuration of an estimator.
    #[error("configuration error: {0}")]
    Config(String),
    /// Non-finite values showed up in a computation.
    #[error("numeric error: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn degenerate<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Degenerate(msg.into()))
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
