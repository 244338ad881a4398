use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: expected length {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("dimension {dim} exceeds dense capacity {cap}")]
    Capacity { dim: usize, cap: usize },

    #[error("eigensolver did not converge after {iterations} iterations (best residual {best_residual:.3e})")]
    Convergence {
        iterations: usize,
        best_residual: f64,
    },

    #[error("unsupported request: {0}")]
    Unsupported(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("no crossing signal: {0}")]
    NoSignal(String),

    #[error("indeterminate crossing pattern: {0}")]
    Indeterminate(String),

    #[error("at parameter {param}: {source}")]
    AtParameter {
        param: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Wraps an error with the swept-parameter value it occurred at.
    pub fn at_parameter(self, param: f64) -> Self {
        Error::AtParameter {
            param,
            source: Box::new(self),
        }
    }

    /// The innermost error, skipping parameter annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtParameter { source, .. } => source.root(),
            other => other,
        }
    }
}
