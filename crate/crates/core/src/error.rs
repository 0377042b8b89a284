use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain spec: {0}")]
    InvalidSpec(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("under-resolved mesh: {fibers:.2} fibers across the widest gap (need at least 4)")]
    UnderResolved { fibers: f64 },
    #[error("non-positive Jacobian {det:e} in element {element}")]
    NonPositiveJacobian { element: usize, det: f64 },
    #[error("non-conforming mesh: {0}")]
    NonConforming(String),
    #[error("conjugate gradient did not converge after {iterations} iterations (relative residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("point ({x}, {y}) lies outside the meshed domain")]
    OutsideDomain { x: f64, y: f64 },
    #[error("boundary gap f2 - f1 has {count} interior maximizers; the location result is set-valued in that case")]
    NonUniqueMaximizer { count: usize },
    #[error("side {side} has {count} samples, at least {required} are needed")]
    TooFewSamples { side: usize, count: usize, required: usize },
    #[error("least-squares fit failed: {0}")]
    Fit(String),
    #[error("{0}")]
    NotFound(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
