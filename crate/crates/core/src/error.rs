use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input violated a documented precondition or invariant.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("alignment references clip {index} but only {count} clips were supplied")]
    UnknownClip { index: usize, count: usize },

    #[error("instance {rows}x{cols} exceeds the exhaustive search limit of {limit}x{limit}")]
    TooLarge {
        rows: usize,
        cols: usize,
        limit: usize,
    },

    #[error("video {video:?} has {available} candidates for anchor, {needed} negatives requested")]
    InsufficientNegatives {
        video: String,
        needed: usize,
        available: usize,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("row {row}, column {col}: {message}")]
    Csv {
        row: usize,
        col: usize,
        message: String,
    },

    #[error("bad magic: expected \"MSYM1\"")]
    BadMagic,

    #[error("truncated payload: header declares {expected} bytes, found {actual}")]
    TruncatedPayload { expected: usize, actual: usize },

    #[error("{extra} unexpected trailing bytes after payload")]
    TrailingBytes { extra: usize },

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
