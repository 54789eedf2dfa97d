use thiserror::Error;

/// Errors produced by the alignment library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid function: {0}")]
    InvalidFunction(String),
    #[error("invalid warping: {0}")]
    InvalidWarping(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("grid mismatch: {0} vs {1} samples")]
    GridMismatch(usize, usize),
    #[error("empty input collection")]
    EmptyInput,
    #[error("antipodal points have no unique log map")]
    Antipodal,
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
