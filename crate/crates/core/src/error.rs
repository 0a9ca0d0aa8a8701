use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A quadrature failed to reach the requested tolerance.
    #[error("quadrature did not converge: {message} (achieved {achieved:.3e}, requested {requested:.3e})")]
    Quadrature {
        message: String,
        achieved: f64,
        requested: f64,
    },

    /// An iterative solver stopped making progress.
    #[error("iteration diverged: {message}")]
    Convergence {
        message: String,
        /// Residual history up to the point of failure.
        trace: Vec<f64>,
    },

    /// A nondegeneracy assumption was violated (e.g. a₀ ≈ 0).
    #[error("nondegeneracy violation: {0}")]
    Degenerate(String),

    /// Geometric preconditions on a grid or domain were not met.
    #[error("geometry error: {0}")]
    Geometry(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn geometry(msg: impl Into<String>) -> Self {
        Error::Geometry(msg.into())
    }

    pub fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }
}
