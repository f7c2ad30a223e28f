//! Approximate state-preparation methods.
//!
//! Three synthesis strategies that trade circuit size against
//! preparation fidelity, all reporting through the same
//! [`qprep_core::report::PrepReport`] shape and all re-verifying their
//! achieved fidelity on a dense simulation of the emitted circuit:
//!
//! - [`mps::mps_prepare`] — matrix-product-state disentangling with
//!   two-qubit window gates,
//! - [`gasp::gasp_prepare`] — genetic search over native-gate genomes
//!   with a gradient polish and a minimal-length binary search,
//! - [`variational::variational_prepare`] — a layered ansatz grown one
//!   layer at a time under Adam.

pub mod error;
pub mod gasp;
pub mod mps;
pub mod variational;

pub use error::{MethodError, MethodResult};
pub use gasp::{gasp_prepare, GaspConfig};
pub use mps::{mps_prepare, MpsConfig, SweepSchedule};
pub use variational::{variational_prepare, VariationalConfig};

/// Crate version, recorded in experiment manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
