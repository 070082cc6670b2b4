use thiserror::Error;

/// Errors raised by the geometric solvers, integrators and experiments.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{context}: no convergence after {iterations} iterations (residual {residual:.3e})")]
    Solver {
        context: &'static str,
        iterations: usize,
        residual: f64,
    },

    /// A reflection solve converged onto the ray with the wrong orientation.
    #[error("orientation error: converged with ray parameter s = {s:.6e} <= 0")]
    Orientation { s: f64 },

    #[error("integration error: {0}")]
    Integration(String),

    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("estimation error: {0}")]
    Estimation(String),

    #[error("invalid parameters: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
