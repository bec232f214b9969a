use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Operands live on different registers / mode counts, or an index is out of range.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// An input violates a precondition (non-finite couplings, non-Hermitian
    /// observables, probabilities outside [0,1], ...).
    #[error("invalid input: {0}")]
    Validation(String),

    /// A linear-algebra or statistical routine failed (singular calibration
    /// matrix, eigensolver breakdown, ...).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A state norm or metric needed for normalization vanished.
    #[error("degenerate state: {0}")]
    Degenerate(String),

    /// Every metric eigenvalue fell below the truncation threshold.
    #[error("empty generalized eigenproblem: all metric eigenvalues below threshold {0:e}")]
    EmptyGep(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
