use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown function `{0}`")]
    UnknownFunction(String),

    #[error("not differentiable: {0}")]
    NotDifferentiable(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("region not covered by rationality link: {0}")]
    RegionNotCovered(String),

    #[error("unknown name `{0}`")]
    UnknownName(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("undetermined: {0}")]
    Undetermined(String),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
