use std::fmt;

use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// The caller supplied data that violates an operation's precondition.
    #[error("invalid input: {0}")]
    Input(String),

    /// A file or configuration could not be parsed.
    #[error("parse error at {location}: {message}")]
    Parse { location: Location, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Where a parse error occurred.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Location {
    pub source: String,
    pub line: Option<usize>,
}

impl Location {
    pub fn new(source: impl Into<String>, line: Option<usize>) -> Self {
        Self { source: source.into(), line }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{}", self.source, line),
            None => write!(f, "{}", self.source),
        }
    }
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn parse(source: &str, line: Option<usize>, msg: impl Into<String>) -> Self {
        Error::Parse { location: Location::new(source, line), message: msg.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
