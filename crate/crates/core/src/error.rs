use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: expected dimension {expected}, got {found}")]
    Shape { expected: usize, found: usize },

    /// A sample oracle could not deliver the requested number of samples.
    #[error(
        "insufficient data: requested {requested} samples but only {available} remain \
         (short by {})", requested - available
    )]
    InsufficientData { requested: usize, available: usize },

    /// A computed resource requirement exceeds its configured cap.
    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("packing budget exhausted: placed {placed} of {requested} vectors in {tries} tries")]
    PackingBudget {
        placed: usize,
        requested: usize,
        tries: usize,
    },

    /// Every iteration of an optimisation run saw an empty band, or a
    /// quadrature or normalisation step failed to produce a finite answer.
    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Shape { expected, found })
    }
}
