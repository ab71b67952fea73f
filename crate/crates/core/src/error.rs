use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("dataset root {0} does not exist")]
    MissingRoot(PathBuf),

    #[error("{path}:{line}: {msg}")]
    Format {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid config: {field}: {msg}")]
    Config { field: String, msg: String },

    #[error("event ordering violated: {0}")]
    EventOrder(String),

    #[error("malformed visit stream: {0}")]
    Visits(String),

    #[error("schema mismatch in {path}: {msg}")]
    Schema { path: PathBuf, msg: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(field: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            msg: msg.into(),
        }
    }

    /// Whether the error stems from user input (usage, config, missing
    /// files) rather than an internal invariant breaking.
    pub fn is_usage(&self) -> bool {
        !matches!(self, Error::EventOrder(_) | Error::Visits(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
