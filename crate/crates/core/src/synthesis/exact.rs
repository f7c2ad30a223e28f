//! Exact preparation of an arbitrary statevector from |0...0>.
//!
//! Works by disentangling the lowest-order qubit one level at a time:
//! a multiplexed Rz aligns the phases of each amplitude pair and a
//! multiplexed Ry rotates the pair weight onto its even branch, halving
//! the effective state size. Running the collected disentangling sequence
//! in reverse (inverted) prepares the state. The multiplexor compiler
//! prunes structure automatically, so product states cost no CNOTs while
//! dense states approach `2^{n+1}` CNOTs.

use num_complex::Complex64;

use super::multiplexer::{multiplexed_rotation, RotationAxis};
use super::transpile::simplify;
use crate::circuit::Circuit;
use crate::error::CoreResult;
use crate::gate::Gate;
use crate::state::Statevector;

/// Synthesizes a circuit `C` with `C|0...0> = target` up to global phase.
pub fn exact_prepare(target: &Statevector) -> CoreResult<Circuit> {
    let n = target.n_qubits();
    let mut amps: Vec<Complex64> = target.amplitudes().to_vec();
    let mut disentangle: Vec<Gate> = Vec::new();

    // Peel off the last qubit repeatedly. At level q the state occupies
    // 2^{q+1} amplitudes; qubits 0..q act as the multiplexor controls.
    for q in (0..n).rev() {
        let half = 1usize << q;
        let mut z_angles = vec![0.0f64; half];
        let mut y_angles = vec![0.0f64; half];
        let mut occupied = vec![false; half];
        let mut next = vec![Complex64::new(0.0, 0.0); half];
        for b in 0..half {
            let z0 = amps[2 * b];
            let z1 = amps[2 * b + 1];
            let r = (z0.norm_sqr() + z1.norm_sqr()).sqrt();
            // arg(0) = 0, so fully polarized branches fall out of the
            // same formulas with no special-casing.
            z_angles[b] = z0.arg() - z1.arg();
            y_angles[b] = -2.0 * z1.norm().atan2(z0.norm());
            occupied[b] = r > 0.0;
            next[b] = Complex64::from_polar(r, 0.5 * (z0.arg() + z1.arg()));
        }
        // Branches with zero weight never see their rotation, so their
        // angles are free. Filling them from a neighboring occupied
        // branch lets the multiplexor compiler collapse structured
        // sparsity (a lone basis state costs no CNOTs at all).
        if let Some(first) = occupied.iter().position(|&o| o) {
            let mut last = first;
            for b in 0..half {
                if occupied[b] {
                    last = b;
                } else {
                    z_angles[b] = z_angles[last];
                    y_angles[b] = y_angles[last];
                }
            }
        }
        let controls: Vec<usize> = (0..q).collect();
        disentangle.extend(multiplexed_rotation(
            RotationAxis::Z,
            &controls,
            q,
            &z_angles,
        )?);
        disentangle.extend(multiplexed_rotation(
            RotationAxis::Y,
            &controls,
            q,
            &y_angles,
        )?);
        amps = next;
    }

    let mut circuit = Circuit::new(n);
    for gate in disentangle.into_iter().rev() {
        circuit.push(gate.inverse())?;
    }
    Ok(simplify(&circuit))
}
