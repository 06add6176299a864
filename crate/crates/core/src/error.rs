use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("index out of range: {0}")]
    Range(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed input: {0}")]
    Parse(String),

    /// The generator (or geometry coloring) made `choices` random choices
    /// without completing the sequence.
    #[error("choice budget of {cap} exceeded")]
    BudgetExceeded { cap: usize },

    /// A trace or log disagrees with the state it is replayed against.
    #[error("corrupt trace: {0}")]
    Corruption(String),

    /// A log could not be decoded; it is not the image of any run.
    #[error("log does not decode: {0}")]
    Decode(String),
}

pub type Result<T> = std::result::Result<T, Error>;
