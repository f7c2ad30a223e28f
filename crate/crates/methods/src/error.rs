//! Error type shared by the preparation methods.

use qprep_core::CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MethodError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("target fidelity {0} must lie in (0, 1]")]
    BadTargetFidelity(f64),
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type MethodResult<T> = Result<T, MethodError>;
