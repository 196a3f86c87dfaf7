use std::fmt;

use thiserror::Error;

/// Location-carrying parse failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    /// Well-formed input that names something undefined or out of range.
    pub semantic: bool,
}

impl ParseError {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            column,
            message: message.into(),
            semantic: false,
        }
    }

    pub fn semantic(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError {
            semantic: true,
            ..ParseError::new(line, column, message)
        }
    }

    /// Shift a single-line error onto line `line` of an enclosing text.
    pub fn at_line(mut self, line: usize) -> Self {
        self.line = line;
        self
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{} at {}", if .0.semantic { "error" } else { "parse error" }, .0)]
    Parse(#[from] ParseError),

    #[error("{0}")]
    Semantic(String),

    #[error("budget exceeded: {what} needs {needed} entries, limit is {limit}")]
    Budget {
        what: String,
        needed: u128,
        limit: usize,
    },

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub fn semantic(msg: impl Into<String>) -> Self {
        Error::Semantic(msg.into())
    }

    pub fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(e) if e.semantic => 2,
            Error::Parse(_) => 1,
            Error::Semantic(_) => 2,
            Error::Budget { .. } => 3,
            Error::Invariant(_) => 4,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
