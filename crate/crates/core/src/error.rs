use thiserror::Error;

/// Errors raised by the measdiv kernels and solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal residual {residual:e})")]
    EigenNoConvergence { sweeps: usize, residual: f64 },

    #[error("eigenvalue {value} lies outside the function domain {domain}")]
    DomainViolation { value: f64, domain: String },

    #[error("operator is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("operator is not normalized (trace {0})")]
    NotNormalized(f64),

    #[error("alternating projections did not converge after {sweeps} sweeps (residuals {residuals:?})")]
    ProjectionNoConvergence { sweeps: usize, residuals: Vec<f64> },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("hypothesis violation: {0}")]
    Hypothesis(String),
}

pub type Result<T> = std::result::Result<T, Error>;
