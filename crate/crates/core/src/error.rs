use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("map {index} is not a contraction (ratio {ratio})")]
    NotContracting { index: usize, ratio: f64 },
    #[error("element is not in block upper-triangular form (residual {residual:.3e})")]
    NotInBlockForm { residual: f64 },
    #[error("singular matrix")]
    Singular,
    #[error("certification failed: {0}")]
    Uncertified(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}
