use thiserror::Error;

/// Failure modes of the model, mean-field, spectrum and exact-diagonalization
/// routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DickeError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("convergence error: {0}")]
    Convergence(String),
    #[error("phase error: {0}")]
    Phase(String),
    #[error("non-real spectrum: {0}")]
    Nonreal(String),
    #[error("capacity error: basis dimension {dim} exceeds the limit {limit}")]
    Capacity { dim: usize, limit: usize },
    #[error("truncation error: {0}")]
    Truncation(String),
}

impl DickeError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        DickeError::Domain(msg.into())
    }
}

pub type Result<T, E = DickeError> = std::result::Result<T, E>;
