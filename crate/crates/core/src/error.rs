use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("no statements")]
    EmptyProgram,

    #[error("variable `{name}` used at {line}:{column} before any definition")]
    UseBeforeDefinition {
        name: String,
        line: usize,
        column: usize,
    },

    #[error("type error at line {line}: {message}")]
    Type { line: usize, message: String },

    #[error("program has no output statement (print or return)")]
    NoOutputStatement,

    #[error("input variable `{0}` is not bound by the test")]
    UnboundInput(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("malformed spectrum: {0}")]
    Spectrum(String),

    #[error("unknown statement `{0}`")]
    UnknownStatement(String),

    #[error("spectrum has no failing test; localization needs at least one failure")]
    NoFailingTests,

    #[error("{0}")]
    Precondition(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 3 for violated preconditions, 2 for
    /// every other input problem.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NoFailingTests | Error::Precondition(_) => 3,
            _ => 2,
        }
    }
}
