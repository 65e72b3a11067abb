use thiserror::Error;

/// Error type shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A configured cap (vertex count, expansion order, ...) would be exceeded.
    #[error("resource cap exceeded: {0}")]
    Resource(String),
    /// The potential fails an integrability or decay requirement.
    #[error("regularity error: {0}")]
    Regularity(String),
    /// A quadrature or series evaluation failed to converge.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// A smallness condition needed by a closed-form bound does not hold.
    #[error("divergence: {0}")]
    Divergence(String),
    /// Inputs are mutually inconsistent (e.g. an invalid stability constant).
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),
    /// Malformed structure (e.g. an edge referencing an unregistered vertex).
    #[error("structural error: {0}")]
    Structural(String),
}

pub type Result<T> = std::result::Result<T, Error>;
