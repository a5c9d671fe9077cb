use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StitError {
    #[error("hyperplane passes within tolerance of a vertex")]
    DegenerateCut,
    #[error("scale factor must be positive, got {0}")]
    NonPositiveScale(f64),
    #[error("invalid polytope: {0}")]
    InvalidPolytope(String),
    #[error("invalid direction: {0}")]
    InvalidDirection(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("cut is not supported for this polytope: {0}")]
    UnsupportedCut(String),
    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),
    #[error("invalid driving measure: {0}")]
    InvalidMeasure(String),
    #[error("hyperplane sampler stalled after {0} rejections")]
    SamplerStall(usize),
    #[error("event cap of {0} divisions exceeded")]
    ExplosionGuard(usize),
    #[error("time {0} is outside the simulated range")]
    OutOfRange(f64),
    #[error("origin lies on a cell boundary")]
    AmbiguousZeroCell,
    #[error("operation requires a tree built with the rejection method")]
    MethodMismatch,
    #[error("iteration needs {needed} nested tessellations, got {got}")]
    InsufficientNests { needed: usize, got: usize },
    #[error("window mismatch: {0}")]
    WindowMismatch(String),
    #[error("directional support does not positively span the space")]
    UnsupportedSupport,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, StitError>;
