//! Error types shared across the core simulation and synthesis routines.

use thiserror::Error;

/// Errors produced by simulation, synthesis, encoding, and dataset routines.
#[derive(Error, Debug)]
pub enum CoreError {
    /// A qubit index referenced a qubit outside the register.
    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    /// Two operands were defined on registers of different sizes.
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    /// An amplitude vector did not have length 2^n or unit norm.
    #[error("invalid statevector: {0}")]
    InvalidState(String),

    /// A gate was constructed with invalid qubits or parameters.
    #[error("invalid gate: {0}")]
    InvalidGate(String),

    /// A matrix expected to be unitary failed the unitarity check.
    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    /// A probability parameter fell outside [0, 1].
    #[error("probability {value} outside [0, 1]")]
    InvalidProbability { value: f64 },

    /// A numeric routine failed to converge or produced an invalid result.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// An image or encoding request was inconsistent.
    #[error("encoding error: {0}")]
    Encoding(String),

    /// A dataset file was malformed.
    #[error("dataset format error: {0}")]
    DatasetFormat(String),

    /// Underlying I/O failure.
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    /// JSON (de)serialization failure.
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

/// Convenience alias used throughout the crate.
pub type CoreResult<T> = Result<T, CoreError>;
