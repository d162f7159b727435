use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operator is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositive(f64),

    #[error("operator is not unitary (deviation {0:.3e})")]
    NonUnitary(f64),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("infeasible targets: {0}")]
    InfeasibleTargets(String),

    #[error("solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    MaxIterations { iterations: usize, residual: f64 },

    #[error("degenerate charges: {0}")]
    DegenerateCharges(String),

    #[error("total dimension {dim} exceeds the guard {limit}")]
    DimensionGuard { dim: usize, limit: usize },

    #[error("malformed input: {0}")]
    Format(String),
}

impl Error {
    /// Whether the error reflects numerical non-convergence rather than bad input.
    pub fn is_convergence_failure(&self) -> bool {
        matches!(self, Error::MaxIterations { .. } | Error::NonFinite(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
