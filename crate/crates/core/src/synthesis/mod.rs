//! Circuit synthesis: exact state preparation, two-qubit unitary
//! decomposition into at most three CNOTs, multiplexed rotations, basis
//! transpilation, and gate accounting.

mod euler;
mod exact;
mod multiplexer;
mod transpile;
mod two_qubit;
mod weyl;

pub use euler::{append_zyz, zyz_decompose, ZyzAngles};
pub use exact::exact_prepare;
pub use multiplexer::{multiplexed_rotation, RotationAxis};
pub use transpile::{count_cnots, simplify, transpile_to_basis};
pub use two_qubit::{decompose_two_qubit, unitary_4x4, unitary_of_circuit, CnotDecomposer};
pub use weyl::{
    canonical_gate, decompose_two_qubit_product_gate, kron2, weyl_coordinates, weyl_decompose,
    WeylDecomposition,
};
