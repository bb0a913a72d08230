use thiserror::Error;

/// Errors raised by contract and domain checks across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("exhaustive search refused for L = {num_rrh} (cap {cap}); use greedy or GSBF heuristics instead")]
    ExhaustiveCap { num_rrh: usize, cap: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
