use stit_core::StitError;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, HarnessError>;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] StitError),
    #[error("need at least {needed} samples per group, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("only {got} conditioned replicates, need {needed}: enlarge N or t2")]
    TooFewConditioned { needed: usize, got: usize },
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    /// Errors caused by the caller's input rather than by a run.
    pub fn is_config(&self) -> bool {
        match self {
            HarnessError::UnknownExperiment(_) | HarnessError::Config(_) => true,
            HarnessError::Core(e) => matches!(
                e,
                StitError::RegimeMismatch(_)
                    | StitError::InvalidParameter(_)
                    | StitError::InvalidMeasure(_)
                    | StitError::InvalidPolytope(_)
                    | StitError::InvalidDirection(_)
                    | StitError::NonPositiveScale(_)
                    | StitError::DimensionMismatch { .. }
                    | StitError::UnsupportedSupport
            ),
            _ => false,
        }
    }
}
