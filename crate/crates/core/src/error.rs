use thiserror::Error;

/// Errors raised by the kernel and the suites built on it.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A denominator series has zero constant term at the chosen point.
    #[error("pole at evaluation point")]
    PoleAtEvaluation,
    #[error("series order mismatch: {0} vs {1}")]
    OrderMismatch(usize, usize),
    #[error("variable {0} is not assigned at the evaluation point")]
    Unassigned(String),
    /// An odd doubled exponent showed up where integer exponents are required.
    #[error("lattice violation in {0}")]
    LatticeViolation(String),
    #[error("no pole-free evaluation point after {0} attempts")]
    Exhausted(usize),
    #[error("invalid root datum: {0}")]
    InvalidDatum(String),
    #[error("usage: {0}")]
    Usage(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("summand mismatch: term 0 has {first}, term {index} has {other}")]
    SummandMismatch {
        index: usize,
        first: String,
        other: String,
    },
    #[error("internal consistency failure: {0}")]
    Internal(String),
    #[error("golden data: {0}")]
    Golden(String),
}

pub type Result<T> = std::result::Result<T, Error>;
