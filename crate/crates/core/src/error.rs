use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LevyError {
    #[error("quadrature did not converge: estimate {estimate:e}, achieved error {achieved:e}, requested {requested:e} ({context})")]
    Quadrature {
        estimate: f64,
        achieved: f64,
        requested: f64,
        context: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("value {value:e} outside achievable range [{lower:e}, {upper:e}]")]
    OutOfRange { value: f64, lower: f64, upper: f64 },

    #[error("characteristic function not integrable: {0}")]
    NotIntegrable(String),

    #[error("Laplace inversion self-inconsistent at x = {x:e}: {low:e} vs {high:e}")]
    InversionInconsistent { x: f64, low: f64, high: f64 },

    #[error("unsupported process for this operation: {0}")]
    Unsupported(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for LevyError {
    fn from(e: std::io::Error) -> Self {
        LevyError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, LevyError>;
