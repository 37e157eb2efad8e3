use thiserror::Error;

/// Errors raised across the lab.
#[derive(Debug, Error)]
pub enum FracError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("variation-order error: {0}")]
    VariationOrder(String),
    #[error("circulant embedding failed: eigenvalue {value:.3e} below tolerance {tolerance:.3e}")]
    Embedding { value: f64, tolerance: f64 },
    #[error("resource cap exceeded: {0}")]
    Resource(String),
    #[error("contract error: {0}")]
    Contract(String),
    #[error("invalid config: {}", .0.join("; "))]
    Config(Vec<String>),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, FracError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(FracError::Domain(msg.into()))
}
