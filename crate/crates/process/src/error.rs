use crate::Domain;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("state entry {index} = {value} violates the {domain} constraint at t = {time}")]
    Constraint {
        time: i64,
        index: usize,
        value: f64,
        domain: Domain,
    },
    #[error("time ordering violated: {from} > {to}")]
    Ordering { from: i64, to: i64 },
    #[error("time {0} outside the model's time domain")]
    OutsideTimeDomain(i64),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("{what} did not converge after {iterations} iterations (partial value {partial})")]
    Divergence {
        what: String,
        partial: f64,
        iterations: usize,
    },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("missing metadata: {0}")]
    MissingMetadata(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("empty set: {0}")]
    Empty(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
