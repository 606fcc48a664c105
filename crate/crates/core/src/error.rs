use thiserror::Error;

/// Errors shared by every solver and constructor in the crate.
///
/// Infeasibility is not an error: solvers report it through their
/// solution status.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("empty effective domain: {0}")]
    EmptyDomain(String),
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    #[error("unbounded objective: {0}")]
    Unbounded(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
