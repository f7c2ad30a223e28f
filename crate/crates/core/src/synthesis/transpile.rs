//! Lowering to the native gate set and peephole cleanup.
//!
//! The native set is {X, SX, RX, RY, RZ, CNOT}. Two-qubit unitary blocks
//! are lowered through the CNOT-basis decomposer; the peephole pass then
//! merges same-axis rotation runs, drops identity rotations, and cancels
//! adjacent CNOT pairs until a fixpoint.

use std::f64::consts::PI;

use super::two_qubit::CnotDecomposer;
use crate::circuit::Circuit;
use crate::error::CoreResult;
use crate::gate::Gate;

/// Angles within this distance of a multiple of 2*pi count as identity
/// (a 2*pi rotation is a pure global phase).
const IDENTITY_ANGLE_TOL: f64 = 1e-12;

fn is_identity_angle(theta: f64) -> bool {
    let r = theta.rem_euclid(2.0 * PI);
    r < IDENTITY_ANGLE_TOL || 2.0 * PI - r < IDENTITY_ANGLE_TOL
}

fn rotation_axis(gate: &Gate) -> Option<(u8, usize, f64)> {
    match gate {
        Gate::Rx { qubit, theta } => Some((0, *qubit, *theta)),
        Gate::Ry { qubit, theta } => Some((1, *qubit, *theta)),
        Gate::Rz { qubit, theta } => Some((2, *qubit, *theta)),
        _ => None,
    }
}

fn make_rotation(axis: u8, qubit: usize, theta: f64) -> Gate {
    match axis {
        0 => Gate::Rx { qubit, theta },
        1 => Gate::Ry { qubit, theta },
        _ => Gate::Rz { qubit, theta },
    }
}

fn simplify_pass(gates: &[Gate], n_qubits: usize) -> (Vec<Gate>, bool) {
    let mut out: Vec<Option<Gate>> = Vec::with_capacity(gates.len());
    // Index into `out` of the most recent surviving gate touching each qubit.
    let mut last: Vec<Option<usize>> = vec![None; n_qubits];
    let mut changed = false;

    for gate in gates {
        if let Some((axis, qubit, theta)) = rotation_axis(gate) {
            if is_identity_angle(theta) {
                changed = true;
                continue;
            }
            if let Some(idx) = last[qubit] {
                if let Some(prev) = &out[idx] {
                    if let Some((prev_axis, prev_qubit, prev_theta)) = rotation_axis(prev) {
                        if prev_axis == axis && prev_qubit == qubit {
                            let merged = prev_theta + theta;
                            changed = true;
                            if is_identity_angle(merged) {
                                out[idx] = None;
                                last[qubit] = None;
                            } else {
                                out[idx] = Some(make_rotation(axis, qubit, merged));
                            }
                            continue;
                        }
                    }
                }
            }
        } else if let Gate::Cnot { control, target } = gate {
            if let (Some(ci), Some(ti)) = (last[*control], last[*target]) {
                if ci == ti {
                    if let Some(prev) = &out[ci] {
                        if prev == gate {
                            out[ci] = None;
                            last[*control] = None;
                            last[*target] = None;
                            changed = true;
                            continue;
                        }
                    }
                }
            }
        }

        let idx = out.len();
        out.push(Some(gate.clone()));
        for q in gate.qubits() {
            last[q] = Some(idx);
        }
    }

    (out.into_iter().flatten().collect(), changed)
}

/// Peephole cleanup: runs merge/drop/cancel passes to a fixpoint. The
/// result acts identically to the input up to global phase.
pub fn simplify(circuit: &Circuit) -> Circuit {
    let mut gates = circuit.gates.clone();
    loop {
        let (next, changed) = simplify_pass(&gates, circuit.n_qubits);
        gates = next;
        if !changed {
            break;
        }
    }
    Circuit {
        n_qubits: circuit.n_qubits,
        gates,
    }
}

/// Lowers every two-qubit unitary block to rotations plus CNOTs and
/// cleans up the result. Gates already in the native set pass through.
pub fn transpile_to_basis(circuit: &Circuit) -> CoreResult<Circuit> {
    let needs_lowering = circuit.gates.iter().any(|g| matches!(g, Gate::U2Q { .. }));
    let mut out = Circuit::new(circuit.n_qubits);
    if needs_lowering {
        let decomposer = CnotDecomposer::new()?;
        for gate in &circuit.gates {
            match gate {
                Gate::U2Q { qubits, matrix } => {
                    let sub = decomposer.decompose(matrix)?;
                    let map = [qubits.0, qubits.1];
                    for g in sub.gates {
                        out.push(remap_two_qubit_gate(g, &map))?;
                    }
                }
                other => out.push(other.clone())?,
            }
        }
    } else {
        out.extend(circuit.gates.iter().cloned())?;
    }
    Ok(simplify(&out))
}

fn remap_two_qubit_gate(gate: Gate, map: &[usize; 2]) -> Gate {
    match gate {
        Gate::X { qubit } => Gate::X { qubit: map[qubit] },
        Gate::Sx { qubit } => Gate::Sx { qubit: map[qubit] },
        Gate::Rx { qubit, theta } => Gate::Rx {
            qubit: map[qubit],
            theta,
        },
        Gate::Ry { qubit, theta } => Gate::Ry {
            qubit: map[qubit],
            theta,
        },
        Gate::Rz { qubit, theta } => Gate::Rz {
            qubit: map[qubit],
            theta,
        },
        Gate::Cnot { control, target } => Gate::Cnot {
            control: map[control],
            target: map[target],
        },
        Gate::U2Q { qubits, matrix } => Gate::U2Q {
            qubits: (map[qubits.0], map[qubits.1]),
            matrix,
        },
    }
}

/// CNOT cost of a circuit with every two-qubit block lowered to the
/// native set (after peephole cleanup).
pub fn count_cnots(circuit: &Circuit) -> CoreResult<usize> {
    Ok(transpile_to_basis(circuit)?.raw_cnot_count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{fidelity, Statevector};
    use crate::synthesis::weyl::{canonical_gate, kron2};
    use nalgebra::Matrix2;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rot_z(qubit: usize, theta: f64) -> Gate {
        Gate::Rz { qubit, theta }
    }

    #[test]
    fn drops_identity_rotations() {
        let mut c = Circuit::new(1);
        c.push(rot_z(0, 0.0)).unwrap();
        c.push(rot_z(0, 2.0 * PI)).unwrap();
        c.push(rot_z(0, 0.5)).unwrap();
        let s = simplify(&c);
        assert_eq!(s.gates.len(), 1);
    }

    #[test]
    fn merges_same_axis_runs() {
        let mut c = Circuit::new(1);
        c.push(rot_z(0, 0.3)).unwrap();
        c.push(rot_z(0, 0.4)).unwrap();
        c.push(Gate::Ry {
            qubit: 0,
            theta: 0.2,
        })
        .unwrap();
        let s = simplify(&c);
        assert_eq!(s.gates.len(), 2);
        assert!(matches!(s.gates[0], Gate::Rz { theta, .. } if (theta - 0.7).abs() < 1e-12));
    }

    #[test]
    fn opposite_rotations_cancel_and_cascade() {
        let mut c = Circuit::new(2);
        c.push(Gate::Cnot {
            control: 0,
            target: 1,
        })
        .unwrap();
        c.push(rot_z(1, 0.8)).unwrap();
        c.push(rot_z(1, -0.8)).unwrap();
        c.push(Gate::Cnot {
            control: 0,
            target: 1,
        })
        .unwrap();
        let s = simplify(&c);
        // The rotations cancel, making the CNOTs adjacent; they cancel too.
        assert_eq!(s.gates.len(), 0);
    }

    #[test]
    fn blocking_gate_prevents_merge() {
        let mut c = Circuit::new(2);
        c.push(rot_z(0, 0.3)).unwrap();
        c.push(Gate::Cnot {
            control: 0,
            target: 1,
        })
        .unwrap();
        c.push(rot_z(0, 0.4)).unwrap();
        let s = simplify(&c);
        assert_eq!(s.gates.len(), 3);
    }

    #[test]
    fn reversed_cnot_does_not_cancel() {
        let mut c = Circuit::new(2);
        c.push(Gate::Cnot {
            control: 0,
            target: 1,
        })
        .unwrap();
        c.push(Gate::Cnot {
            control: 1,
            target: 0,
        })
        .unwrap();
        let s = simplify(&c);
        assert_eq!(s.gates.len(), 2);
    }

    #[test]
    fn rotation_on_control_does_not_block_cnot_pair() {
        // A rotation on a third qubit leaves the CNOT pair adjacent.
        let mut c = Circuit::new(3);
        c.push(Gate::Cnot {
            control: 0,
            target: 1,
        })
        .unwrap();
        c.push(rot_z(2, 0.4)).unwrap();
        c.push(Gate::Cnot {
            control: 0,
            target: 1,
        })
        .unwrap();
        let s = simplify(&c);
        assert_eq!(s.gates.len(), 1);
        assert!(matches!(s.gates[0], Gate::Rz { .. }));
    }

    #[test]
    fn simplified_circuit_preserves_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        for _ in 0..20 {
            let n = rng.gen_range(2..=4);
            let mut c = Circuit::new(n);
            for _ in 0..30 {
                match rng.gen_range(0..4) {
                    0 => {
                        let q = rng.gen_range(0..n);
                        c.push(rot_z(q, rng.gen_range(-0.5..0.5))).unwrap();
                    }
                    1 => {
                        let q = rng.gen_range(0..n);
                        c.push(Gate::Ry {
                            qubit: q,
                            theta: rng.gen_range(-0.5..0.5),
                        })
                        .unwrap();
                    }
                    2 => {
                        let a = rng.gen_range(0..n);
                        let b = (a + 1) % n;
                        c.push(Gate::Cnot {
                            control: a,
                            target: b,
                        })
                        .unwrap();
                    }
                    _ => {
                        let q = rng.gen_range(0..n);
                        // Identity rotations that should vanish.
                        c.push(rot_z(q, 0.0)).unwrap();
                    }
                }
            }
            let s = simplify(&c);
            assert!(s.gates.len() <= c.gates.len());
            let input = Statevector::random(n, &mut rng);
            let a = c.apply(&input).unwrap();
            let b = s.apply(&input).unwrap();
            let f = fidelity(&a, &b).unwrap();
            assert!(f > 1.0 - 1e-10, "fidelity {f} after simplify");
        }
    }

    #[test]
    fn lowers_two_qubit_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(56);
        let core = canonical_gate(0.6, 0.4, 0.2);
        let l = crate::gate::ry_matrix(rng.gen_range(-2.0..2.0));
        let r = crate::gate::rz_matrix(rng.gen_range(-2.0..2.0));
        let u = kron2(&l, &r) * core;
        let mut c = Circuit::new(3);
        c.push(Gate::u2q(0, 2, u).unwrap()).unwrap();
        let lowered = transpile_to_basis(&c).unwrap();
        assert!(lowered.gates.iter().all(|g| !matches!(g, Gate::U2Q { .. })));
        assert_eq!(lowered.raw_cnot_count(), 3);
        // Action must be preserved up to global phase.
        let input = Statevector::random(3, &mut rng);
        let want = c.apply(&input).unwrap();
        let got = lowered.apply(&input).unwrap();
        assert!(fidelity(&want, &got).unwrap() > 1.0 - 1e-9);
    }

    #[test]
    fn count_cnots_decomposes_blocks() {
        let identity_block = Matrix2::identity();
        let local = kron2(&identity_block, &crate::gate::ry_matrix(0.3));
        let mut c = Circuit::new(2);
        c.push(Gate::Cnot {
            control: 0,
            target: 1,
        })
        .unwrap();
        c.push(Gate::u2q(0, 1, local).unwrap()).unwrap();
        assert_eq!(count_cnots(&c).unwrap(), 1);

        let mut c2 = Circuit::new(2);
        c2.push(Gate::u2q(0, 1, canonical_gate(0.5, 0.3, 0.1)).unwrap())
            .unwrap();
        assert_eq!(count_cnots(&c2).unwrap(), 3);
    }

    #[test]
    fn native_circuit_passes_through() {
        let mut c = Circuit::new(2);
        c.push(Gate::X { qubit: 0 }).unwrap();
        c.push(Gate::Sx { qubit: 1 }).unwrap();
        c.push(Gate::Cnot {
            control: 0,
            target: 1,
        })
        .unwrap();
        let t = transpile_to_basis(&c).unwrap();
        assert_eq!(t.gates.len(), 3);
    }
}
