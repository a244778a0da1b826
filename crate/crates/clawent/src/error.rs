use thiserror::Error;

/// Errors shared across the library.
///
/// Numerical routines return `Domain`/`Range` for arguments outside the
/// monotone branch they invert, `Kind` when an operation is undefined for the
/// flux shape, and `Param` when a tolerance precondition fails. `Stall` and
/// `Coverage` carry enough context to diagnose a misconfigured run.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("kind error: {0}")]
    Kind(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("support error: {0}")]
    Support(String),
    #[error("parameter error: {0}")]
    Param(String),
    #[error("class error: {0}")]
    Class(String),
    #[error("degenerate flux: {0}")]
    Degenerate(String),
    #[error("interaction budget exhausted after {events} events")]
    Stall { events: u64 },
    #[error("cover failed on {} of {total} samples (indices {uncovered:?})", uncovered.len())]
    Coverage { uncovered: Vec<usize>, total: usize },
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
