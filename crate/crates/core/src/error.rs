use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input violates a documented precondition (range, normalization, shape).
    #[error("invalid input: {0}")]
    Validation(String),
    /// The input is well-formed but the quantity is undefined there.
    #[error("domain error: {0}")]
    Domain(String),
    /// Two computation paths that must agree did not.
    #[error("numerical consistency error: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
