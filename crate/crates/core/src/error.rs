use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("matrix is numerically singular (sigma_min estimate {sigma_min:e})")]
    Singular { sigma_min: f64 },

    #[error("zero pivot {pivot:e} at elimination step {step}")]
    ZeroPivot { step: usize, pivot: f64 },

    #[error("pivot block at step {step} is numerically singular (sigma_min/sigma_max = {ratio:e})")]
    SingularPivotBlock { step: usize, ratio: f64 },

    #[error("Jacobi SVD did not converge after {sweeps} sweeps (off-diagonal residual {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("size {size} exceeds the cap {cap}")]
    SizeCap { size: usize, cap: usize },

    #[error("instance generation failed after {attempts} attempts: {reason}")]
    Generation { attempts: usize, reason: String },

    #[error("integer overflow risk: {0}")]
    Overflow(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
