use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index {index} out of range for length {len}")]
    Index { index: usize, len: usize },

    #[error("degenerate ensemble: {0}")]
    DegenerateEnsemble(String),

    #[error("collapse infeasible: {0}")]
    CollapseInfeasible(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
