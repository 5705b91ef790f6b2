use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid exponent: {0}")]
    InvalidExponent(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature failure: {0}")]
    Quadrature(String),

    #[error("root finding failure: {0}")]
    RootFinding(String),

    #[error("parse failure: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
