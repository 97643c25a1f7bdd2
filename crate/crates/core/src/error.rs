use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate Gaussian measure: {0}")]
    DegenerateMeasure(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported dimension {0}; grid work is limited to d <= 3")]
    UnsupportedDimension(usize),

    #[error("value {value} outside the domain of {what}")]
    Domain { what: &'static str, value: f64 },

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("grids or measures of the operands differ")]
    GridMismatch,

    #[error("operation requires the standard Gaussian measure")]
    NonStandardMeasure,

    #[error("non-finite value at node {0}")]
    NonFinite(usize),

    #[error("invalid schedule: {0}")]
    Schedule(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("field is not smooth; {0} requires a smooth field")]
    NotSmooth(&'static str),

    #[error("root finding failed for {what}: bracket [{lo}, {hi}]")]
    RootFinding { what: String, lo: f64, hi: f64 },

    #[error("solver did not converge after {iterations} iterations (duality gap {gap:e})")]
    NotConverged { iterations: usize, gap: f64 },

    #[error("conjugate evaluator unavailable for integrand {0}")]
    MissingConjugate(String),

    #[error("malformed grid data: {0}")]
    MalformedGrid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
