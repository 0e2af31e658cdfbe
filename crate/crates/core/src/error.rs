use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("group closure exceeded {0} elements")]
    NonClosure(usize),
    #[error("unknown group `{0}`")]
    UnknownGroup(String),
    #[error("no eulerian cycle: {0}")]
    NoEulerianCycle(String),
    #[error("search exhausted: {0}")]
    NotFound(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("operator is not hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("operator is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("dimension {0} exceeds cap {1}")]
    DimensionCap(usize, usize),
    #[error("insufficient points in fit window: {0}")]
    InsufficientPoints(usize),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
