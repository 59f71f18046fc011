use thiserror::Error;

/// Errors raised by geometry, sampling and estimation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("hyperboloid radius mismatch: {0} vs {1}")]
    RadiusMismatch(f64, f64),

    #[error("point violates manifold invariant: {0}")]
    InvalidPoint(String),

    #[error("matrix is not symmetric positive definite (min eigenvalue {min_eigenvalue:e})")]
    NotSpd { min_eigenvalue: f64 },

    #[error("invalid isometry: {0}")]
    InvalidIsometry(String),

    #[error("isometry variant does not act on this point type")]
    VariantMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input")]
    EmptyInput,

    #[error("minimum risk equivariant estimate undefined: {0}")]
    UndefinedEstimate(String),

    #[error("sampler acceptance rate {rate:e} below guard; reduce the concentration")]
    LowAcceptance { rate: f64 },

    #[error("log target is NaN at the initial state (step {step})")]
    NanTarget { step: usize },

    #[error("chain never accepted a proposal in {iterations} iterations")]
    ZeroAcceptance { iterations: usize },

    #[error("solver did not converge: {0}")]
    NonConvergence(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Whether the error comes from a numerical routine rather than bad input or config.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotSpd { .. }
                | Error::UndefinedEstimate(_)
                | Error::LowAcceptance { .. }
                | Error::NanTarget { .. }
                | Error::ZeroAcceptance { .. }
                | Error::NonConvergence(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
