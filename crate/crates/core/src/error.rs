use std::path::PathBuf;

use crate::ink::{Channel, SetId, TaskId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("line {line}: {channel} value {value} out of range")]
    ChannelRange { channel: Channel, line: usize, value: i64 },

    #[error("value out of range: {0}")]
    Range(String),

    #[error("series too short: got {len} samples, need at least {min}")]
    TooShort { len: usize, min: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("shape mismatch: {left} vs {right}")]
    Shape { left: usize, right: usize },

    #[error("invalid value: {0}")]
    Value(String),

    #[error("duplicate record for subject {subject}, set {set}, task {task}")]
    Duplicate { subject: String, set: SetId, task: TaskId },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("corpus layout: {0}")]
    Layout(String),

    #[error("configuration error: {0}")]
    Config(String),

    // The wrapped error is part of the message, not a separate source, so
    // chained printing does not repeat it.
    #[error("{}: {error}", path.display())]
    Io { path: PathBuf, error: std::io::Error },

    #[error("{}: {error}", path.display())]
    AtPath { path: PathBuf, error: Box<Error> },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            error: source,
        }
    }

    pub(crate) fn at(path: impl Into<PathBuf>, source: Error) -> Self {
        Error::AtPath {
            path: path.into(),
            error: Box::new(source),
        }
    }

    /// Line number of a parse diagnostic, looking through path wrappers.
    pub fn line(&self) -> Option<usize> {
        match self {
            Error::Format { line, .. } | Error::ChannelRange { line, .. } => Some(*line),
            Error::AtPath { error, .. } => error.line(),
            _ => None,
        }
    }
}
