use thiserror::Error;

/// Errors reported by the ranking library.
#[derive(Debug, Error)]
pub enum Error {
    /// A sample, curve or configuration failed validation.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Vector/matrix dimensions do not agree.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A score-generating function was evaluated outside its domain.
    #[error("{kind}: argument {arg} outside the domain")]
    Domain { kind: &'static str, arg: f64 },

    /// The score-generating function has no derivative; it cannot drive the
    /// gradient-ascent path.
    #[error("{0} is not differentiable")]
    NotDifferentiable(&'static str),

    /// A covariance matrix has no Cholesky factorization.
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    /// Gradient ascent produced a non-finite gradient, usually a divergent
    /// step size.
    #[error("non-finite gradient at iteration {0}")]
    NonFiniteGradient(usize),

    /// Configuration file could not be parsed or validated.
    #[error("configuration: {0}")]
    Config(String),

    /// File I/O while writing experiment outputs.
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
