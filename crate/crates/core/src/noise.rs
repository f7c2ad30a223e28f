//! Monte-Carlo depolarizing noise on two-qubit gates.
//!
//! Convention: after every two-qubit gate, with probability `p` one of the
//! 15 non-identity two-qubit Pauli operators is applied, chosen uniformly.
//! Single-qubit gates stay ideal. Each trajectory is a pure state, so noisy
//! observables are estimated by averaging over seeded trajectories.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::Circuit;
use crate::error::{CoreError, CoreResult};
use crate::state::Statevector;

/// Applies the circuit with one sampled noise trajectory (explicit RNG).
pub fn sample_depolarizing_with_rng(
    circuit: &Circuit,
    input: &Statevector,
    p: f64,
    rng: &mut impl Rng,
) -> CoreResult<Statevector> {
    if !(0.0..=1.0).contains(&p) {
        return Err(CoreError::InvalidProbability { value: p });
    }
    if input.n_qubits() != circuit.n_qubits {
        return Err(CoreError::DimensionMismatch {
            left: input.n_qubits(),
            right: circuit.n_qubits,
        });
    }
    let mut state = input.clone();
    for gate in &circuit.gates {
        state.apply_gate_mut(gate)?;
        if gate.is_two_qubit() {
            // Draw even when p = 0 so trajectory streams stay aligned
            // across sweeps of the noise strength.
            let hit = rng.gen_range(0.0..1.0) < p;
            if hit {
                let which = rng.gen_range(1..16u8);
                let qs = gate.qubits();
                state.apply_pauli_mut(qs[0], which / 4)?;
                state.apply_pauli_mut(qs[1], which % 4)?;
            }
        }
    }
    Ok(state)
}

/// One seeded noise trajectory.
pub fn sample_depolarizing(
    circuit: &Circuit,
    input: &Statevector,
    p: f64,
    seed: u64,
) -> CoreResult<Statevector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_depolarizing_with_rng(circuit, input, p, &mut rng)
}

/// Mean ⟨Z_q⟩ for each requested qubit over `n_trajectories` seeded
/// trajectories. Trajectory t uses the dedicated stream (seed, t) so the
/// estimate is reproducible and independent of evaluation order.
pub fn mean_z_expectations(
    circuit: &Circuit,
    input: &Statevector,
    p: f64,
    qubits: &[usize],
    n_trajectories: usize,
    seed: u64,
) -> CoreResult<Vec<f64>> {
    if n_trajectories == 0 {
        return Err(CoreError::InvalidState("zero trajectories".into()));
    }
    let mut sums = vec![0.0; qubits.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for t in 0..n_trajectories {
        rng.set_stream(t as u64);
        let state = sample_depolarizing_with_rng(circuit, input, p, &mut rng)?;
        for (slot, &q) in sums.iter_mut().zip(qubits) {
            *slot += state.expectation_z(q)?;
        }
    }
    for s in &mut sums {
        *s /= n_trajectories as f64;
    }
    Ok(sums)
}
