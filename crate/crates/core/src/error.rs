use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error(transparent)]
    Interval(#[from] IntervalError),

    #[error("unknown generator {0}")]
    UnknownGenerator(String),

    /// Raised when an exact certificate that must hold by construction fails.
    #[error("construction bug: {0}")]
    ConstructionBug(String),
}

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum IntervalError {
    #[error("interval endpoints are not ordered finite reals: [{lo}, {hi}]")]
    Malformed { lo: f64, hi: f64 },

    #[error("division by an interval containing zero")]
    Singularity,

    #[error("{op} is undefined on [{lo}, {hi}]")]
    Domain { op: &'static str, lo: f64, hi: f64 },

    #[error("{op} overflows the representable range")]
    Range { op: &'static str },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
