use thiserror::Error;

/// Errors produced across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is out of range or inconsistent.
    #[error("configuration error: {0}")]
    Config(String),
    /// An operation was called with arguments that violate its contract.
    #[error("usage error: {0}")]
    Usage(String),
    /// The SVM could not be trained on the given data.
    #[error("training error: {0}")]
    Training(String),
    /// The data cannot satisfy a requested transformation.
    #[error("data error: {0}")]
    Data(String),
    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
