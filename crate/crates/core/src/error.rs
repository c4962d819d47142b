use thiserror::Error;

/// Errors raised by generators, estimators and the experiment harnesses.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid count: {0}")]
    InvalidCount(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("covariance has numerical rank zero")]
    RankZero,

    #[error("singular system: {0}")]
    Singular(String),

    #[error("score undefined: {0}")]
    UndefinedScore(String),

    #[error("unstable Monte-Carlo estimate: mean {mean}, standard error {std_err}")]
    UnstableEstimate { mean: f64, std_err: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by degenerate numerical input rather than bad configuration.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::RankZero
                | Error::Singular(_)
                | Error::UndefinedScore(_)
                | Error::UnstableEstimate { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
