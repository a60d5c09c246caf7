use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An arithmetic operation outside its domain, e.g. inverting zero.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("operands belong to different fields")]
    MixedFields,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("construction failed for {object}: {reason}")]
    Construction { object: String, reason: String },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
