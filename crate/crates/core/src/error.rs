use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("inadmissible moment pair (m3 = {m3}, m4 = {m4}): {reason}")]
    InadmissibleMoments { m3: f64, m4: f64, reason: String },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{failed} of {total} trials failed (first: {first})")]
    TrialFailures {
        failed: usize,
        total: usize,
        first: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
