//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed payload: {0}")]
    MalformedPayload(String),

    #[error("figure without an image locator: {0}")]
    UnresolvableImage(String),

    #[error("empty text")]
    EmptyText,

    #[error("too few documents: need at least {need}, got {got}")]
    TooFewDocuments { need: usize, got: usize },

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("encoder adapter unavailable: {0}")]
    AdapterUnavailable(String),

    #[error("failed to decode image {path}: {reason}")]
    ImageDecodeError { path: String, reason: String },

    #[error("SALIENT section encoding requires a query figure")]
    MissingFigure,

    #[error("index {index} out of range for {what} (max {max})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        max: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("sequence of {len} slots exceeds the configured cap {cap}")]
    SequenceTooLong { len: usize, cap: usize },

    #[error("context sequence lacks a required slot: {0}")]
    MissingSlot(String),

    #[error("section has no candidate embeddings")]
    EmptyCandidates,

    #[error("temperature must be positive, got {0}")]
    InvalidTemperature(f64),

    #[error("loss diverged (non-finite) at step {step}")]
    DivergedLoss { step: usize },

    #[error("figure {figure} has only {got} ranked sections, need {need}")]
    InsufficientRanking {
        figure: String,
        got: usize,
        need: usize,
    },

    #[error("not enough items for annotation export: need {need}, got {got}")]
    InsufficientItems { need: usize, got: usize },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid json in {path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("invalid toml in {path}: {source}")]
    Toml {
        path: String,
        #[source]
        source: toml::de::Error,
    },

    #[error("invalid checkpoint: {0}")]
    InvalidCheckpoint(String),

    #[error("{0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
