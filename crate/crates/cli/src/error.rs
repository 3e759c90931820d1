use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("unknown preset `{0}` (see `presets`)")]
    UnknownPreset(String),

    #[error("{context}: {source}")]
    Model {
        context: String,
        #[source]
        source: bohm_rotor::Error,
    },

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub(crate) fn model(context: impl Into<String>) -> impl FnOnce(bohm_rotor::Error) -> Self {
        let context = context.into();
        move |source| Self::Model { context, source }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| Self::Io { path, source }
    }

    /// Process exit status: 2 for numerical failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Model { source, .. } if source.is_numerical() => 2,
            _ => 1,
        }
    }
}
