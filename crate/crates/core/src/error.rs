use std::path::PathBuf;

use thiserror::Error;

use crate::geometry::GeometryError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors surfaced by the library. Every variant is a data or configuration
/// problem; the CLI maps all of them to exit status 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("{0}: no records")]
    Empty(String),

    #[error(transparent)]
    Geometry(#[from] GeometryError),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid dataset: {0}")]
    Dataset(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("vocabulary mismatch: {0}")]
    VocabMismatch(String),

    #[error("non-finite gradient: {0}")]
    NonFinite(String),

    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl ToString, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.to_string(),
            line,
            msg: msg.into(),
        }
    }
}
