use thiserror::Error;

/// Errors raised by the numerical kernels and the experiment driver.
#[derive(Debug, Error)]
pub enum Error {
    /// Operand dimensions do not fit together.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A dense object would exceed the configured entry cap.
    #[error("size cap exceeded: {0}")]
    Size(String),

    /// Input outside the domain of the operation (non-Hermitian, non-finite, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Index or count out of range.
    #[error("out of range: {0}")]
    Range(String),

    /// Petz reference state is not full rank.
    #[error("invalid reference state: {0}")]
    Reference(String),

    /// Input to a recovery map has weight outside the support of the image of the reference.
    #[error("support violation: {0}")]
    Support(String),

    /// Recovered operator has eigenvalues below the rejection threshold.
    #[error("recovered operator not positive: {0}")]
    NotPositive(String),

    /// Malformed or inconsistent experiment configuration.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
