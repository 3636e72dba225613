use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid ROI width mu = {mu}: need 0 < mu < {max}")]
    InvalidRoi { mu: f64, max: f64 },

    #[error("quadrature did not converge: last estimate {estimate:e}, error estimate {error:e}")]
    Quadrature { estimate: f64, error: f64 },

    #[error("dimension mismatch: expected length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("grid collision between data sample {row} and object sample {col}")]
    GridCollision { row: usize, col: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point {x} outside the domain ({lo}, {hi})")]
    Domain { x: f64, lo: f64, hi: f64 },

    #[error("decomposition failed: {0}")]
    Decomposition(String),

    #[error("empty ROI: no object sample in ({lo}, {hi})")]
    EmptyRoi { lo: f64, hi: f64 },

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("bound not applicable at delta = {delta:e}: {reason}")]
    BoundNotApplicable { delta: f64, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
