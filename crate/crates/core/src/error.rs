//! Error taxonomy shared across the workspace.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Tensor or segment dimensions do not line up.
    #[error("shape error: {0}")]
    Shape(String),

    /// An operation was called against its preconditions.
    #[error("usage error: {0}")]
    Usage(String),

    /// Invalid configuration (bad distribution, unknown tier, overlapping bins, ...).
    #[error("config error: {0}")]
    Config(String),

    /// A training item is unusable, e.g. an utterance without any transcript.
    #[error("data error: {0}")]
    Data(String),

    /// The ephemeral store refused an access (consumed, expired or unknown id).
    #[error("custody error: {0}")]
    Custody(String),

    /// A month stream was asked for more utterances than it has.
    #[error("capacity error: {0}")]
    Capacity(String),

    /// A prerequisite artifact (world, pretrained model) is missing.
    #[error("setup error: {0}")]
    Setup(String),

    /// A metric is undefined for the given inputs (e.g. WERR with zero base).
    #[error("undefined: {0}")]
    Undefined(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
