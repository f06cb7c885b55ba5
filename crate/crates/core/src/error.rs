use thiserror::Error;

/// Errors produced by the aggregation toolkit.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("threshold not met: need {needed}, have {have}")]
    Threshold { needed: usize, have: usize },

    #[error("value out of range: {0}")]
    Range(String),

    #[error("share transport failure: {0}")]
    Transport(String),

    #[error("malformed encoding: {0}")]
    Format(String),

    #[error("authenticated decryption failed")]
    Decryption,

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("transaction rejected: {0}")]
    Rejected(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}

pub(crate) fn format(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}
