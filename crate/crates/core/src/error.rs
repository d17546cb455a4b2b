use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("radial coordinate {r} outside the domain of {manifold}")]
    Domain { r: f64, manifold: String },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("symmetrized operator is not symmetric (defect {0:.3e})")]
    Asymmetric(f64),
    #[error("Picard iteration failed to contract: {0}")]
    Picard(String),
    #[error("domain truncation residual {residual:.3e} exceeds {limit:.1e}")]
    Truncation { residual: f64, limit: f64 },
    #[error("lambda truncation self-check failed (difference {difference:.3e}); try lambda_max = {suggested}")]
    LambdaTruncation { difference: f64, suggested: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
