use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("exponent arithmetic overflowed: {0}")]
    Overflow(String),
    #[error("evaluation outside certified region: {0}")]
    OutOfRegion(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("relation check failed: {0}")]
    RelationFailure(String),
    #[error("coefficient mismatch at (n, r) = ({n}, {r}): {detail}")]
    Inconsistent { n: i64, r: i64, detail: String },
    #[error("not cuspidal: minimal discriminant {0}")]
    NotCuspidal(String),
    #[error("refused: {0}")]
    Refused(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
