use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("Lanczos did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("non-measurable pair: rungs {0} and {1} share a site")]
    NonMeasurablePair(usize, usize),

    #[error("time step: {0}")]
    StepSize(String),

    #[error("trace drift {drift:e} exceeds tolerance, retry with a smaller dt")]
    TraceDrift { drift: f64 },

    #[error("invalid noise model: {0}")]
    NoiseModel(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
