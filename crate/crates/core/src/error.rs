//! Error type shared by every module.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A denominator factor vanished.
    #[error("pole: {0}")]
    Pole(String),
    #[error("series has no termination witness: {0}")]
    NoTermination(String),
    #[error("series did not converge: {0}")]
    NonConvergent(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("weights are not a probability distribution: {0}")]
    NonProbabilistic(String),
    #[error("invalid index: {0}")]
    InvalidIndex(String),
}

impl Error {
    pub fn is_pole(&self) -> bool {
        matches!(self, Error::Pole(_))
    }
}
