//! Core quantum-circuit toolkit: dense statevector simulation, a small
//! native gate set, adjoint-mode gradients, circuit synthesis (exact
//! state preparation and two-qubit unitary decomposition), amplitude
//! encoding of images, dataset handling, and reproducible RNG plumbing.
//!
//! Conventions used throughout the workspace:
//!
//! - Qubit 0 is the highest-order bit of the computational basis index.
//! - Two-qubit unitary blocks on `(qa, qb)` index their 4x4 matrix by
//!   `2 * bit(qa) + bit(qb)`.
//! - Circuits act on `|0...0>` unless an explicit input is given, and
//!   equivalence is always up to global phase.

pub mod adam;
pub mod circuit;
pub mod dataset;
pub mod encoding;
pub mod error;
pub mod gate;
pub mod gradient;
pub mod noise;
pub mod report;
pub mod rng;
pub mod state;
pub mod synthesis;

pub use circuit::{layered_ansatz, Circuit};
pub use dataset::LabeledDataset;
pub use error::{CoreError, CoreResult};
pub use gate::Gate;
pub use state::{expectation, fidelity, Observable, Statevector};

/// Crate version, recorded in experiment manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
