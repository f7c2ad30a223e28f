//! Ordered gate sequences: construction, simulation, parameter binding,
//! depth/CNOT accounting, JSON serialization, and OpenQASM 2.0 export.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, CoreResult};
use crate::gate::Gate;
use crate::state::Statevector;

/// An ordered list of gates on a fixed-width register. Gates apply in
/// list order: `gates[0]` acts first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: Vec::new(),
        }
    }

    /// Appends a gate after validating its qubit indices.
    pub fn push(&mut self, gate: Gate) -> CoreResult<()> {
        for q in gate.qubits() {
            if q >= self.n_qubits {
                return Err(CoreError::QubitOutOfRange {
                    index: q,
                    n_qubits: self.n_qubits,
                });
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) -> CoreResult<()> {
        for g in gates {
            self.push(g)?;
        }
        Ok(())
    }

    /// Applies all gates, in order, to `input`.
    pub fn apply(&self, input: &Statevector) -> CoreResult<Statevector> {
        if input.n_qubits() != self.n_qubits {
            return Err(CoreError::DimensionMismatch {
                left: input.n_qubits(),
                right: self.n_qubits,
            });
        }
        let mut state = input.clone();
        for g in &self.gates {
            state.apply_gate_mut(g)?;
        }
        Ok(state)
    }

    /// Simulates the circuit from |0…0⟩.
    pub fn simulate(&self) -> CoreResult<Statevector> {
        self.apply(&Statevector::zero(self.n_qubits))
    }

    /// The reversed sequence of inverse gates; composes with `self` to the
    /// identity (up to global phase, when SX appears).
    pub fn inverse(&self) -> Circuit {
        Circuit {
            n_qubits: self.n_qubits,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    /// Number of continuous parameters (one per rotation gate).
    pub fn parameter_count(&self) -> usize {
        self.gates.iter().map(Gate::parameter_count).sum()
    }

    /// Current rotation angles, in gate order.
    pub fn parameters(&self) -> Vec<f64> {
        self.gates
            .iter()
            .filter_map(|g| match g {
                Gate::Rx { theta, .. } | Gate::Ry { theta, .. } | Gate::Rz { theta, .. } => {
                    Some(*theta)
                }
                _ => None,
            })
            .collect()
    }

    /// Returns a copy with rotation angles replaced by `params` (gate order).
    pub fn bind_parameters(&self, params: &[f64]) -> CoreResult<Circuit> {
        if params.len() != self.parameter_count() {
            return Err(CoreError::DimensionMismatch {
                left: params.len(),
                right: self.parameter_count(),
            });
        }
        let mut out = self.clone();
        let mut it = params.iter();
        for g in &mut out.gates {
            match g {
                Gate::Rx { theta, .. } | Gate::Ry { theta, .. } | Gate::Rz { theta, .. } => {
                    *theta = *it.next().expect("length checked");
                }
                _ => {}
            }
        }
        Ok(out)
    }

    /// Number of explicit CNOT gates (U2Q blocks are *not* expanded here;
    /// see the synthesis module for decomposed counting).
    pub fn raw_cnot_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g, Gate::Cnot { .. }))
            .count()
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    /// Circuit depth: length of the longest qubit-dependency chain.
    pub fn depth(&self) -> usize {
        let mut per_qubit = vec![0usize; self.n_qubits];
        for g in &self.gates {
            let qs = g.qubits();
            let level = qs.iter().map(|&q| per_qubit[q]).max().unwrap_or(0) + 1;
            for q in qs {
                per_qubit[q] = level;
            }
        }
        per_qubit.into_iter().max().unwrap_or(0)
    }

    pub fn to_json(&self) -> CoreResult<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(json: &str) -> CoreResult<Circuit> {
        let circuit: Circuit = serde_json::from_str(json)?;
        for g in &circuit.gates {
            for q in g.qubits() {
                if q >= circuit.n_qubits {
                    return Err(CoreError::QubitOutOfRange {
                        index: q,
                        n_qubits: circuit.n_qubits,
                    });
                }
            }
        }
        Ok(circuit)
    }

    /// OpenQASM 2.0 text for circuits in the {x, sx, rx, ry, rz, cx} basis.
    /// Fails on unexpanded U2Q gates.
    pub fn to_qasm(&self) -> CoreResult<String> {
        let mut out = String::new();
        out.push_str("OPENQASM 2.0;\n");
        out.push_str("include \"qelib1.inc\";\n");
        out.push_str(&format!("qreg q[{}];\n", self.n_qubits));
        for g in &self.gates {
            let line = match g {
                Gate::X { qubit } => format!("x q[{qubit}];"),
                Gate::Sx { qubit } => format!("sx q[{qubit}];"),
                Gate::Rx { qubit, theta } => format!("rx({theta:.17e}) q[{qubit}];"),
                Gate::Ry { qubit, theta } => format!("ry({theta:.17e}) q[{qubit}];"),
                Gate::Rz { qubit, theta } => format!("rz({theta:.17e}) q[{qubit}];"),
                Gate::Cnot { control, target } => format!("cx q[{control}],q[{target}];"),
                Gate::U2Q { .. } => {
                    return Err(CoreError::InvalidGate(
                        "U2Q gate has no QASM form; transpile to the basis first".into(),
                    ))
                }
            };
            out.push_str(&line);
            out.push('\n');
        }
        Ok(out)
    }
}

/// A hardware-style layered ansatz: each layer applies an arbitrary rotation
/// (RZ·RY·RZ) to every qubit, then entangles neighbours with a CNOT chain
/// (0,1),(1,2),…,(n−2,n−1). All angles start at zero, so the unbound circuit
/// is the identity; it carries 3·n·layers parameters.
pub fn layered_ansatz(n_qubits: usize, n_layers: usize) -> Circuit {
    let mut circuit = Circuit::new(n_qubits);
    for _ in 0..n_layers {
        for q in 0..n_qubits {
            circuit.gates.push(Gate::Rz {
                qubit: q,
                theta: 0.0,
            });
            circuit.gates.push(Gate::Ry {
                qubit: q,
                theta: 0.0,
            });
            circuit.gates.push(Gate::Rz {
                qubit: q,
                theta: 0.0,
            });
        }
        for q in 0..n_qubits.saturating_sub(1) {
            circuit.gates.push(Gate::Cnot {
                control: q,
                target: q + 1,
            });
        }
    }
    circuit
}
