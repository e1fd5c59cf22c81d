use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its admissible range. `field` names the
    /// offending parameter so callers can report it verbatim.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (residual {0:e})")]
    NotHermitian(f64),

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("disorder configuration {index} (seed {seed}) failed: {source}")]
    Ensemble {
        index: usize,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("sweep point {index:?} failed: {source}")]
    SweepPoint {
        index: (usize, usize),
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn param(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by the caller's input rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::InvalidParameter { .. } | Error::DimensionMismatch(_) => true,
            Error::Ensemble { source, .. } | Error::SweepPoint { source, .. } => {
                source.is_input_error()
            }
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
