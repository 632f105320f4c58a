use thiserror::Error;

/// Every fallible operation in the crate reports one of these.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum TwirlError {
    #[error("dimension mismatch: expected {expected} qubits, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("parse error at index {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("distance is undefined for a channel with zero error probability")]
    UndefinedDistance,

    #[error("{what} needs {requested} qubits but the cap is {cap}")]
    CapExceeded {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("degenerate channel: {0}")]
    Degenerate(String),

    #[error("config error at {pointer}: {message}")]
    Config { pointer: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, TwirlError>;

impl TwirlError {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        TwirlError::Validation(msg.into())
    }

    pub(crate) fn unsupported(msg: impl Into<String>) -> Self {
        TwirlError::Unsupported(msg.into())
    }
}

impl From<std::io::Error> for TwirlError {
    fn from(e: std::io::Error) -> Self {
        TwirlError::Io(e.to_string())
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(TwirlError::Dimension { expected, found })
    }
}
