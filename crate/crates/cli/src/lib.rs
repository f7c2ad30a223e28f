//! Experiment driver for the state-preparation workbench.
//!
//! One JSON configuration file describes a full study — dataset,
//! encoding, preparation methods, classifier, attacks, and noise
//! sweeps — and each subcommand runs one stage of it, writing CSV and
//! JSON artifacts plus a reproducibility manifest into the output
//! directory. All randomness derives from the single master seed, so a
//! rerun with the same configuration reproduces every output byte.

pub mod config;
pub mod error;
pub mod manifest;
pub mod pipeline;
pub mod runs;
pub mod util;

pub use config::{ExperimentConfig, MethodName};
pub use error::{CliError, CliResult};
pub use manifest::RunManifest;

/// Crate version, recorded in experiment manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
