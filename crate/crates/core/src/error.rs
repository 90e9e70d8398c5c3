use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error("payload truncated in record {record} (byte {offset})")]
    Truncated { record: u64, offset: u64 },

    #[error("checksum mismatch for {path}: manifest has {expected:08x}, file has {actual:08x}")]
    Checksum { path: String, expected: u32, actual: u32 },

    #[error("key of {0} bytes exceeds the 65535-byte limit")]
    KeyTooLong(usize),

    #[error("zero-norm vector `{id}`: cosine similarity is undefined")]
    ZeroVector { id: String },

    /// Numerically degenerate input: too few words, empty subspace, zero variance.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }

    pub(crate) fn format(offset: u64, msg: impl Into<String>) -> Self {
        Error::Format {
            offset,
            message: msg.into(),
        }
    }
}
