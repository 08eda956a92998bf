use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("not a group element: {0}")]
    NotMember(String),
    #[error("not hyperbolic: {0}")]
    NotHyperbolic(String),
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("incompatible gluing: {0}")]
    Incompatible(String),
}

pub type Result<T> = std::result::Result<T, Error>;
