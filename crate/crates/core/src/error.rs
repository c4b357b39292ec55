use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The gate-composition and eigendecomposition routes disagree, or two
    /// closed forms that must coincide do not.
    #[error("internal consistency failure: {0}")]
    Inconsistent(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("fit quality: {0}")]
    FitQuality(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
