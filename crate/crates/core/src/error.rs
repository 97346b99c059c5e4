use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WspError {
    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("invalid hierarchy: {0}")]
    InvalidHierarchy(String),

    #[error("level {level} out of range (hierarchy depth is {depth})")]
    LevelOutOfRange { level: usize, depth: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("search space too large: {0}")]
    Guard(String),

    #[error("infeasible generator parameters: {0}")]
    Infeasible(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, WspError>;
