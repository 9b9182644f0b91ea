use thiserror::Error;

/// Errors produced by the library. Infeasibility is never an error; it is
/// reported through [`crate::Solution::feasible`] or [`crate::exact::Optimum`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("precision loss: result {value:e} is within {ratio:.1} units of the cancellation estimate {estimate:e}")]
    PrecisionLoss { value: f64, estimate: f64, ratio: f64 },

    #[error("capacity exceeded: instance needs {required_bytes} bytes, limit is {limit_bytes}")]
    Capacity { required_bytes: u64, limit_bytes: u64 },

    #[error("invalid state: {0}")]
    State(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("instance kind mismatch: {0}")]
    KindMismatch(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
