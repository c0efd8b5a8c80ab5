use std::path::PathBuf;

/// Errors produced by the tensor-completion library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid shape {0:?}: order must be 1..=8 and every extent >= 1")]
    InvalidShape(Vec<usize>),

    #[error("data length {len} does not match shape {shape:?}")]
    DataLength { shape: Vec<usize>, len: usize },

    #[error("mode {mode} out of range for a tensor of order {order}")]
    ModeOutOfRange { mode: usize, order: usize },

    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch { left: Vec<usize>, right: Vec<usize> },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("sampling mask has no observed entries")]
    EmptyMask,

    #[error("singular value decomposition failed: {0}")]
    Svd(String),

    #[error("ORACLE stopping requires the ground-truth tensor")]
    MissingTruth,

    #[error("solver diverged at iteration {iteration}: {detail}")]
    Diverged { iteration: usize, detail: String },

    #[error("zero denominator")]
    ZeroDenominator,

    #[error("format error in {path}: {detail}")]
    Format { path: PathBuf, detail: String },

    #[error("unsupported file {path}: {detail}")]
    Unsupported { path: PathBuf, detail: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, detail: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            detail: detail.into(),
        }
    }
}
