use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("profile document line {line}: {message}")]
    ProfileSyntax { line: usize, message: String },

    #[error("profile {profile}, row {row}: {message}")]
    ProfileRow {
        profile: String,
        row: usize,
        message: String,
    },

    #[error("profile {profile}: {message}")]
    Profile { profile: String, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("unknown config key `{0}`")]
    UnknownConfigKey(String),

    #[error("{context}: {source}")]
    Stage {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Wraps the error with a description of the stage that produced it.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Stage {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// True for errors caused by configuration rather than runtime failures.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config { .. } | Error::UnknownConfigKey(_))
    }
}
