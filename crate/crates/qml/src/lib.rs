//! Quantum-classifier training and adversarial-robustness tooling.
//!
//! Builds on the simulator core and the state-preparation methods:
//! a variational quantum classifier over amplitude-encoded images, a
//! small classical surrogate network that serves as the attack source,
//! and PGD-based transfer attacks evaluated across classifier variants.

pub mod attack;
pub mod classify;
pub mod error;
pub mod qvc;
pub mod surrogate;

pub use attack::{
    pgd_attack, perturb, transfer_evaluate, AttackConfig, TransferReport, TransferRow,
};
pub use classify::{DifferentiableClassifier, ImageClassifier, Preparation, PreparedQvc};
pub use error::{QmlError, QmlResult};
pub use qvc::{
    encode_dataset, input_gradient, train, trace_to_csv, QvcModel, TracePoint, TrainConfig,
};
pub use surrogate::{surrogate_gradient, train_surrogate, SurrogateModel};

/// Crate version, recorded in experiment manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
