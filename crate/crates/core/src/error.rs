use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid grid, basis or run parameters.
    #[error("configuration error: {0}")]
    Config(String),

    /// A config file line could not be understood.
    #[error("parse error at line {line} (key `{key}`): {msg}")]
    Parse {
        line: usize,
        key: String,
        msg: String,
    },

    /// The discrete state stopped being finite or a linear solve broke down.
    #[error("numerical state error: {0}")]
    Numerical(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parse { .. } => 2,
            Error::Numerical(_) => 3,
            Error::Io { .. } => 1,
        }
    }
}
