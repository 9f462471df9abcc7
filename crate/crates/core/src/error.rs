use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("entry {value} at position {position} is outside [0,1]")]
    EntryOutOfRange { position: usize, value: f64 },

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("invalid index: {0}")]
    InvalidIndex(String),

    #[error("invalid plane: {0}")]
    InvalidPlane(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("budget exceeded: {what} needs {needed} terms, budget is {budget}")]
    BudgetExceeded {
        what: &'static str,
        needed: String,
        budget: u64,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("generator failed: {0}")]
    Generator(String),
}

pub type Result<T> = std::result::Result<T, Error>;
