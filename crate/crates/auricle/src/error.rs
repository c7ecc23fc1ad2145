use std::path::PathBuf;

use thiserror::Error;

/// Unified error type for the toolbox.
///
/// Variants map onto the failure classes surfaced by the public API:
/// I/O, image decoding, malformed structured files, invalid arguments,
/// protocol violations (split/fold/gallery inconsistencies), and bad
/// experiment configuration.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot decode image {path}: {source}")]
    ImageDecode {
        path: PathBuf,
        #[source]
        source: Box<image::ImageError>,
    },

    /// Structured file (CSV, filter bank, split list) violates its format.
    #[error("format error in {file}: {message}")]
    Format { file: String, message: String },

    /// Caller passed arguments that violate a documented precondition.
    #[error("invalid input: {0}")]
    Validation(String),

    /// Evaluation protocol cannot proceed (e.g. probe identity missing
    /// from the gallery, empty score pools).
    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(file: impl std::fmt::Display, message: impl Into<String>) -> Self {
        Error::Format {
            file: file.to_string(),
            message: message.into(),
        }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Error::Validation(message.into())
    }

    pub fn protocol(message: impl Into<String>) -> Self {
        Error::Protocol(message.into())
    }

    pub fn config(message: impl Into<String>) -> Self {
        Error::Config(message.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
