use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The QR iteration did not deflate the given eigenvalue within the sweep cap.
    #[error("eigensolver did not converge for eigenvalue index {index}")]
    NumericFailure { index: usize },

    #[error("precondition failed: {0}")]
    Precondition(String),

    /// The spectrum has no common eigenvalue order; carries the reason.
    #[error("eigenvalues have no common order: {0}")]
    NoCommonOrder(String),

    #[error("search configuration error: {0}")]
    Config(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
