use thiserror::Error;

/// Errors produced by the analysis routines and the file front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid hopping profile for user {user}: {reason}")]
    InvalidProfile { user: usize, reason: String },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} too large to enumerate: {size} exceeds limit {limit}")]
    TooLarge {
        what: &'static str,
        size: f64,
        limit: f64,
    },

    #[error("quadrature did not converge: error estimate {estimate:e} above tolerance {tol:e}")]
    NoConvergence { estimate: f64, tol: f64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable tag used in error JSON and FFI status mapping.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidScenario(_) => "invalid_scenario",
            Error::InvalidProfile { .. } => "invalid_profile",
            Error::InvalidDistribution(_) => "invalid_distribution",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::TooLarge { .. } => "too_large",
            Error::NoConvergence { .. } => "no_convergence",
            Error::Json(_) => "parse",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
