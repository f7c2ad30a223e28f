//! Error type shared by the classifier and attack layers.

use qprep_core::CoreError;
use qprep_methods::MethodError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum QmlError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Method(#[from] MethodError),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("label {label} outside {n_classes} classes")]
    BadLabel { label: usize, n_classes: usize },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("classifier {0:?} exposes no input gradients")]
    NoInputGradient(String),
    #[error("serialization failure: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type QmlResult<T> = Result<T, QmlError>;
