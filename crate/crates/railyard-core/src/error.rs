use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed input: wrong lengths, bad letters, unparsable numbers.
    #[error("invalid input: {0}")]
    Structural(String),
    /// An argument outside the domain of a function.
    #[error("domain error: {0}")]
    Domain(String),
    /// A factor of an infinite product or series is not convergent.
    #[error("divergent factor: {0}")]
    Divergence(String),
    /// A bijection was applied to partitions violating its precondition.
    #[error("contract violation in {op} at {step}: {detail}")]
    Contract {
        op: &'static str,
        step: String,
        detail: String,
    },
    /// A numerical routine failed to converge or lost accuracy.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
