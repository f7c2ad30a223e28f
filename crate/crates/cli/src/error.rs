//! Error type for experiment orchestration.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] qprep_core::CoreError),
    #[error(transparent)]
    Method(#[from] qprep_methods::MethodError),
    #[error(transparent)]
    Qml(#[from] qprep_qml::QmlError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("config error: {0}")]
    Config(String),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("missing input: {0}")]
    MissingInput(String),
}

pub type CliResult<T> = Result<T, CliError>;
