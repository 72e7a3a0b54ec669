use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("density is not differentiable at {point:?}")]
    NonDifferentiable { point: Vec<f64> },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("not applicable: {0}")]
    Inapplicable(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("curve did not close within length budget {budget} (travelled {travelled})")]
    NonClosing {
        budget: f64,
        travelled: f64,
        partial: Vec<[f64; 2]>,
    },

    #[error("profile estimation failed: {0}")]
    EstimationFailed(String),

    #[error("spacing error: {0}")]
    Spacing(String),

    #[error("invalid construction spec: {0}")]
    InvalidSpec(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by malformed or out-of-contract input, as opposed
    /// to a numerical procedure that failed to converge.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::Config(_)
                | Error::InvalidRegion(_)
                | Error::Precondition(_)
                | Error::Inapplicable(_)
                | Error::Spacing(_)
                | Error::InvalidSpec(_)
                | Error::Json(_)
                | Error::Io(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
