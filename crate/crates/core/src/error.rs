use thiserror::Error;

/// Errors raised by the arithmetic and verification routines.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid field parameters p={p}, e={e}: {reason}")]
    FieldParams { p: u32, e: u32, reason: String },
    #[error("unknown variable index {0}")]
    UnknownVariable(usize),
    #[error("division by zero")]
    DivisionByZero,
    #[error("leading coefficient is not invertible: {0}")]
    NonUnitLeading(String),
    #[error("series does not converge: {0}")]
    Divergence(String),
    #[error("precision infeasible: {0}")]
    Precision(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("exponent overflow: {0}")]
    Overflow(String),
}

pub type Result<T> = std::result::Result<T, Error>;
