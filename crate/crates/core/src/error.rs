use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("non-finite integrand value {value} at ({u}, {v})")]
    Evaluation { u: f64, v: f64, value: f64 },
    #[error("at least 2 samples are required, got {0}")]
    InsufficientSamples(usize),
    #[error("quadrature is limited to dimension {max}, got {requested}")]
    DimensionTooLarge { requested: usize, max: usize },
    #[error("leading {0}x{0} covariance block is not positive definite")]
    NotPositiveDefinite(usize),
    #[error("indices must be strictly increasing and start at 1: {0:?}")]
    NonIncreasingIndices(Vec<usize>),
    #[error("empty sample batch")]
    EmptyBatch,
    #[error("grid with {cells} cells exceeds budget of {budget}")]
    GridTooLarge { cells: usize, budget: usize },
    #[error("second-moment series diverges; measure is not in M2")]
    NotSquareIntegrable,
}

pub type Result<T> = std::result::Result<T, Error>;
