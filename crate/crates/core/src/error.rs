//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value violates a precondition.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Matrix is singular (exact zero pivot after pivoting).
    #[error("singular matrix: {0}")]
    Singular(String),

    /// Vector/matrix dimensions do not match.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Evaluation point outside the computational domain.
    #[error("point {0} outside domain [{1}, {2}]")]
    OutOfDomain(f64, f64, f64),

    /// A structural requirement on the discretisation is violated,
    /// e.g. a mesh without exact translation symmetry fed to the shift assembly.
    #[error("structural error: {0}")]
    Structural(String),

    /// An iterative or factorisation procedure failed to reach its tolerance.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
