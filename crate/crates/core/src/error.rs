use std::path::PathBuf;

use thiserror::Error;

/// Every failure the detector can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("no image frames found for input `{0}`")]
    EmptyInput(String),

    #[error("invalid input pattern `{pattern}`: {reason}")]
    InvalidPattern { pattern: String, reason: String },

    #[error("stride must be at least 1, got {0}")]
    InvalidStride(usize),

    #[error("target dimensions must be at least 1x1, got {width}x{height}")]
    InvalidDimensions { width: u32, height: u32 },

    #[error("i/o error on `{path}`: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot decode `{path}`: {reason}")]
    Decode { path: PathBuf, reason: String },

    #[error("kmeans needs at least k points: got N={points} with k={k}")]
    InsufficientPoints { points: usize, k: usize },

    #[error("point {index} has a non-finite component")]
    NonFiniteInput { index: usize },

    #[error("invalid cluster configuration: {0}")]
    InvalidClusterConfig(String),

    #[error("invalid detector configuration: {0}")]
    InvalidDetectorConfig(String),

    #[error("leave-one-out comparison needs at least 2 frames, got {0}")]
    TooFewFrames(usize),

    #[error("length mismatch: {features} feature records but {assignments} cluster assignments")]
    LengthMismatch { features: usize, assignments: usize },

    #[error("invalid recipe: {0}")]
    InvalidRecipe(String),

    #[error("report serialization failed: {0}")]
    Serialize(String),

    #[error("chart rendering failed for `{path}`: {reason}")]
    Render { path: PathBuf, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
