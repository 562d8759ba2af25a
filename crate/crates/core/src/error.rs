use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    /// Malformed file contents. `origin` is a path or a short description of
    /// the in-memory source.
    #[error("{origin}: {msg}")]
    Format { origin: String, msg: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A network spec and weight store disagree; `layer` is the first
    /// offending layer in spec order.
    #[error("layer `{layer}`: {msg}")]
    Weights { layer: String, msg: String },
}

impl Error {
    pub fn io(path: impl AsRef<Path>, source: io::Error) -> Self {
        Error::Io {
            path: path.as_ref().to_path_buf(),
            source,
        }
    }

    pub fn format(origin: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Format {
            origin: origin.into(),
            msg: msg.into(),
        }
    }

    /// Re-labels a `Format` error produced from an in-memory buffer with the
    /// file it was read from.
    pub fn at_path(self, path: &Path) -> Self {
        match self {
            Error::Format { msg, .. } => Error::Format {
                origin: path.display().to_string(),
                msg,
            },
            other => other,
        }
    }

    /// True for errors caused by the data handed in rather than the
    /// environment (bad shapes, bad config, malformed files).
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io { .. })
    }
}
