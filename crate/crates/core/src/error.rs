use thiserror::Error;

/// Errors raised across geometry, discretisation, assembly and solution.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid geometry parameters: {0}")]
    InvalidGeometry(String),

    #[error("space is empty: {0}")]
    EmptySpace(String),

    #[error("unsupported space: {0}")]
    UnsupportedSpace(String),

    #[error("dimension mismatch: {what} ({left} vs {right})")]
    DimensionMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },

    #[error("kernel singularity: evaluation at zero separation")]
    Singularity,

    #[error("degenerate triangle (area {0:e})")]
    DegenerateTriangle(f64),

    #[error("evaluation point too close to the screen (distance {distance:e}, limit {limit:e})")]
    PointTooClose { distance: f64, limit: f64 },

    #[error("inner GMRES failed to reach {tol:e} within {iterations} iterations (residual {residual:e})")]
    InnerSolveFailed {
        tol: f64,
        iterations: usize,
        residual: f64,
    },

    #[error("dense diagnostics limited to dimension {limit}, got {dim}; use iteration counts instead")]
    TooLarge { dim: usize, limit: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
