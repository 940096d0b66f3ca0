use thiserror::Error;

/// Errors raised by the numeric kernels, the optimizer and the experiment drivers.
#[derive(Debug, Error)]
pub enum QngError {
    #[error("matrix is not Hermitian (‖M − M†‖_F = {0:e})")]
    NotHermitian(f64),

    #[error("eigensolver did not converge within its sweep budget")]
    ConvergenceFailure,

    #[error("eigenvalue {0:e} lies outside the domain of the applied function")]
    DomainError(f64),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("state is numerically singular (min eigenvalue {0:e})")]
    SingularState(f64),

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("Bloch vector [{0}, {1}, {2}] is not strictly inside the unit ball")]
    InvalidBlochVector(f64, f64, f64),

    #[error("metric is singular or not positive definite (pivot {0:e})")]
    SingularMetric(f64),

    #[error("gradient vanished (norm {0:e})")]
    VanishingGradient(f64),

    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, QngError>;
