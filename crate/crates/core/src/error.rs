use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("every sample of the function is the infinity sentinel")]
    EmptyDomain,
    #[error("point {0:?} lies outside the grid hull")]
    OutOfDomain(Vec<f64>),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("input is not convex: {0}")]
    NonConvexInput(String),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("no feasible transport plan avoids the forbidden entries")]
    Infeasible,
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error("dimension {0} is not supported here")]
    DimensionUnsupported(usize),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("map unavailable: {0}")]
    MapUnavailable(String),
    #[error("non-finite derivative sample at step {0}")]
    StepUnderflow(usize),
    #[error("variant not supported: {0}")]
    VariantUnsupported(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("path is not feasible: {0}")]
    InfeasiblePath(String),
}

pub type Result<T> = std::result::Result<T, Error>;
