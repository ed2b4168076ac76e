use thiserror::Error;

use crate::capacity::CapacityResult;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("field order {0} is not a prime")]
    NotPrime(u64),

    #[error("field order must be at least 2, got {0}")]
    FieldTooSmall(u64),

    #[error("entry {value} out of range for F_{q}")]
    EntryOutOfRange { value: u32, q: u32 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrices live over different fields (F_{0} vs F_{1})")]
    FieldMismatch(u32, u32),

    #[error("invalid channel dimensions: {0}")]
    InvalidDims(String),

    #[error("invalid rank distribution: {0}")]
    InvalidDistribution(String),

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("enumeration cap exceeded: {what} needs {needed} elements, cap is {cap}")]
    CapExceeded { what: String, needed: u128, cap: u128 },

    #[error("optimizer did not converge after {} iterations (gap {:.3e})", .0.iterations, .0.convergence_gap)]
    NotConverged(Box<CapacityResult>),

    #[error("Blahut-Arimoto over the explicit alphabet did not converge after {iterations} iterations (gap {gap:.3e})")]
    OracleNotConverged { iterations: usize, gap: f64 },

    #[error("subspace grouping is inconsistent: {0}")]
    GroupingInconsistency(String),

    #[error("invalid network configuration: {0}")]
    InvalidNetwork(String),
}
