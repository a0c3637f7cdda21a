use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Image dimensions are not a multiple of the block size. No padding is applied.
    #[error("{width}x{height} image is not divisible into {block_w}x{block_h} blocks")]
    Dimension {
        width: usize,
        height: usize,
        block_w: usize,
        block_h: usize,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("value out of range: {0}")]
    Range(String),

    /// The requested operation is only defined for uniform-key encryption.
    #[error("mode error: {0}")]
    Mode(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("malformed key file: {0}")]
    KeyFormat(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("codec error for {path}: {message}")]
    Codec { path: String, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn codec(path: impl Into<String>, message: impl ToString) -> Self {
        Error::Codec {
            path: path.into(),
            message: message.to_string(),
        }
    }
}
