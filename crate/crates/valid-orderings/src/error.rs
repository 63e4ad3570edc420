use thiserror::Error;

/// Everything that can go wrong in the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed input: bad index, bad token, bad table.
    #[error("input error: {0}")]
    Input(String),
    /// A size cap was exceeded.
    #[error("capacity error: {what} exceeds limit {limit}")]
    Capacity { what: String, limit: usize },
    /// A documented precondition does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// A value violated the contract of the operation it was passed to.
    #[error("contract error: {0}")]
    Contract(String),
    /// A randomized construction ran out of retries.
    #[error("construction failure: {0}")]
    Construction(String),
    /// The operation is not defined for this kind of group.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// An invariant that should be guaranteed by a theorem failed.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn construction<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Construction(msg.into()))
}
