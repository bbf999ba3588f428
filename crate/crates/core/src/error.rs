use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the transform, tracking and I/O layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be positive")]
    ZeroDimension,

    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("mode index {0} is out of range (expected 1..=3)")]
    InvalidMode(usize),

    #[error("non-finite value in input")]
    NonFinite,

    #[error("pixel value {0} outside [0, 1]")]
    PixelRange(f64),

    #[error("cache is empty")]
    EmptyCache,

    #[error("buffer is empty")]
    EmptyBuffer,

    #[error("truncation cutoff {cutoff} on axis {axis} must be below the dimension {dim}")]
    CutoffOutOfRange { axis: usize, cutoff: usize, dim: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("bounding box {0}")]
    InvalidBox(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("no image frames found in {0}")]
    EmptySequence(PathBuf),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
