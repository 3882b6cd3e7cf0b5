use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("size guard exceeded: {what} is {size}, limit {limit}")]
    SizeGuard {
        what: &'static str,
        size: u128,
        limit: u128,
    },

    #[error("invalid partition spec: {0}")]
    InvalidSpec(String),

    #[error("invalid probability vector: {0}")]
    InvalidProbabilities(String),

    #[error("invalid quantum input: {0}")]
    InvalidQuantum(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("scenario hash mismatch: file has {found}, scenario is {expected}")]
    HashMismatch { expected: String, found: String },

    #[error("face candidate must have {expected} members, found {found}")]
    SubsetSize { expected: usize, found: usize },

    #[error("degenerate face candidate")]
    DegenerateFace,

    #[error("integer overflow: {0}")]
    Overflow(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
