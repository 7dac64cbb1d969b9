//! Error type shared across the workbench.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input data: bad edges, dimension mismatches, shape errors.
    #[error("structural error: {0}")]
    Structural(String),

    /// A computation was requested above a configured resource cap.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A zero-probability branch or an underdetermined basis was encountered.
    #[error("degenerate: {0}")]
    Degenerate(String),

    /// Configuration or input-file validation failed.
    #[error("validation error: {0}")]
    Validation(String),

    /// A numerical self-check failed (quadrature escape, non-monotone oracle, ...).
    #[error("numerical assertion failed: {0}")]
    Numerical(String),

    #[error("linear algebra backend error: {0}")]
    Linalg(#[from] ndarray_linalg::error::LinalgError),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
