use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("logical surface intersects an erased outcome")]
    ErasedLogical,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("curves do not cross inside the sweep grid")]
    NoThresholdInRange,
    #[error("decoder inconsistency: {0}")]
    Decoder(String),
    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
