use thiserror::Error;

/// Errors raised by the toolkit. Variants map one-to-one onto the failure
/// modes of the individual operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numeric failure at {location}: {detail}")]
    NumericFailure { location: String, detail: String },

    #[error("group spec invalid: {0}")]
    GroupSpecInvalid(String),

    #[error("homogeneity lattice too small: {0}")]
    LatticeTooSmall(String),

    #[error("degenerate lattice system: {0}")]
    DegenerateLattice(String),

    #[error("function is not of Schwartz type: {0}")]
    NotSchwartz(String),

    #[error("grid too small: {0}")]
    GridTooSmall(String),

    #[error("moment certification failed: {0}")]
    MomentCertificationFailed(String),

    #[error("unstable time step: {0}")]
    UnstableStep(String),

    #[error("solver failure: {0}")]
    SolverFailure(String),

    #[error("invalid dictionary: {0}")]
    InvalidDictionary(String),

    #[error("degenerate pair: {0}")]
    DegeneratePair(String),

    #[error("degenerate family: {0}")]
    DegenerateFamily(String),

    #[error("hypothesis not met: {0}")]
    HypothesisNotMet(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn numeric(location: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::NumericFailure {
            location: location.into(),
            detail: detail.into(),
        }
    }
}
