use thiserror::Error;

/// Errors raised across the toolkit.
///
/// Variants split into two families: validation problems (bad shapes, bad
/// parameters, out-of-range inputs) and numerical failures (singular systems,
/// degenerate covariances, queries far from the model support). The CLI maps
/// the first family to exit code 2 and the second to exit code 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate covariance: {0}")]
    DegenerateCovariance(String),

    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("rank deficient basis matrix for {family} basis ({detail})")]
    RankDeficient { family: String, detail: String },

    #[error("query is far from the model support (max input log-density {max_log_density:.3})")]
    FarFromSupport { max_log_density: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by the numbers rather than by the inputs' shape.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DegenerateCovariance(_)
                | Error::SingularSystem(_)
                | Error::RankDeficient { .. }
                | Error::FarFromSupport { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
