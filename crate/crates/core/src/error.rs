use std::path::PathBuf;

/// Errors produced by corpus handling, model construction and evaluation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("format error at line {line}: {msg}")]
    Format { line: usize, msg: String },

    #[error("range error at line {line}: {msg}")]
    Range { line: usize, msg: String },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("topic {topic} is empty and smoothing is zero")]
    DegenerateTopic { topic: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn format(line: usize, msg: impl Into<String>) -> Self {
        Error::Format { line, msg: msg.into() }
    }

    pub(crate) fn range(line: usize, msg: impl Into<String>) -> Self {
        Error::Range { line, msg: msg.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// True for errors caused by malformed or inconsistent input data, as
    /// opposed to invalid caller arguments.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Format { .. } | Error::Range { .. } | Error::Dimension(_) | Error::Io { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
