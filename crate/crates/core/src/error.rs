use thiserror::Error;

use crate::Nat;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("oracle contract violated at {index}: value {value} is not below {bound}")]
    OracleContract { index: Nat, value: Nat, bound: Nat },

    #[error("order function violation at n={n}: {reason}")]
    OrderViolation { n: u64, reason: String },

    #[error("horizon too small: {0}")]
    HorizonTooSmall(String),

    #[error("search space of {estimate} exceeds cap {cap}")]
    CapExceeded { estimate: u128, cap: u128 },

    #[error("transformer did not halt within {budget} steps")]
    ExhaustedTransformer { budget: u64 },

    #[error("undetermined within budget {budget}: {what}")]
    Undetermined { what: String, budget: u64 },

    #[error("invariant breach: {0}")]
    InvariantBreach(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
