use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("lens prescription line {line}: {message}")]
    LensParse { line: usize, message: String },

    #[error("invalid lens prescription: {0}")]
    InvalidLens(String),

    #[error("invalid microlens array: {0}")]
    InvalidMla(String),

    #[error("invalid camera configuration: {field}: {message}")]
    Config { field: String, message: String },

    #[error("invalid scene: {0}")]
    Scene(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("image mismatch: {0}")]
    Mismatch(String),

    #[error("{0}")]
    OutOfRange(String),

    #[error("malformed image file {path}: {message}")]
    ImageFormat { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("png encoding: {0}")]
    Png(#[from] image::ImageError),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
