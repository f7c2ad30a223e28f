//! Reverse-mode (adjoint) differentiation of circuit losses.
//!
//! A single forward pass evolves the input state through the circuit. The
//! backward pass then maintains two vectors — the evolving state ψ and the
//! cotangent λ = ∂L/∂ψ* — and walks the gates in reverse. For a rotation
//! gate U(θ) = exp(−i·θ/2·P) the chain rule gives
//!
//!   dL/dθ = 2·Re(λ† · ∂ψ/∂θ) = Im(λ† · P · ψ),
//!
//! evaluated at the post-gate cut, after which both vectors are pulled back
//! through U†. The cost is two sweeps of the circuit regardless of the
//! number of parameters. Central finite differences serve as the test
//! oracle, never as the production path.

use num_complex::Complex64;

use crate::circuit::Circuit;
use crate::error::{CoreError, CoreResult};
use crate::gate::Gate;
use crate::state::Statevector;

/// A differentiable scalar loss of the circuit's output state.
pub trait Loss {
    /// L(ψ).
    fn value(&self, state: &Statevector) -> CoreResult<f64>;
    /// The Wirtinger cotangent ∂L/∂ψ* as a vector over amplitudes.
    fn cotangent(&self, state: &Statevector) -> CoreResult<Vec<Complex64>>;
}

/// L = Σ_j w_j·⟨Z_{q_j}⟩.
pub struct WeightedZLoss {
    /// (qubit, weight) pairs.
    pub terms: Vec<(usize, f64)>,
}

impl Loss for WeightedZLoss {
    fn value(&self, state: &Statevector) -> CoreResult<f64> {
        let mut acc = 0.0;
        for &(q, w) in &self.terms {
            acc += w * state.expectation_z(q)?;
        }
        Ok(acc)
    }

    fn cotangent(&self, state: &Statevector) -> CoreResult<Vec<Complex64>> {
        // ⟨Z⟩ = ψ†Zψ, so ∂L/∂ψ* = Σ w_j Z_j ψ.
        let mut lam = vec![Complex64::ZERO; state.dim()];
        for &(q, w) in &self.terms {
            if q >= state.n_qubits() {
                return Err(CoreError::QubitOutOfRange {
                    index: q,
                    n_qubits: state.n_qubits(),
                });
            }
            let mask = state.qubit_mask(q);
            for (i, a) in state.amplitudes().iter().enumerate() {
                let sign = if i & mask == 0 { w } else { -w };
                lam[i] += sign * a;
            }
        }
        Ok(lam)
    }
}

/// L = 1 − |⟨target|ψ⟩|², the infidelity to a fixed target state.
pub struct InfidelityLoss {
    pub target: Statevector,
}

impl Loss for InfidelityLoss {
    fn value(&self, state: &Statevector) -> CoreResult<f64> {
        Ok(1.0 - crate::state::fidelity(&self.target, state)?)
    }

    fn cotangent(&self, state: &Statevector) -> CoreResult<Vec<Complex64>> {
        // With c = ⟨t|ψ⟩: L = 1 − c·c̄ and ∂L/∂ψ*_i = −c·t_i.
        let c = self.target.inner(state)?;
        Ok(self.target.amplitudes().iter().map(|t| -c * t).collect())
    }
}

/// L = −log softmax(⟨Z_0⟩,…,⟨Z_{k−1}⟩)_label — cross-entropy on the
/// expectation readout of the first `n_classes` qubits.
pub struct CrossEntropyLoss {
    pub label: usize,
    pub n_classes: usize,
}

/// Numerically stable softmax.
pub fn softmax(xs: &[f64]) -> Vec<f64> {
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exped: Vec<f64> = xs.iter().map(|x| (x - max).exp()).collect();
    let sum: f64 = exped.iter().sum();
    exped.into_iter().map(|e| e / sum).collect()
}

impl CrossEntropyLoss {
    fn expectations(&self, state: &Statevector) -> CoreResult<Vec<f64>> {
        (0..self.n_classes)
            .map(|q| state.expectation_z(q))
            .collect()
    }
}

impl Loss for CrossEntropyLoss {
    fn value(&self, state: &Statevector) -> CoreResult<f64> {
        if self.label >= self.n_classes {
            return Err(CoreError::InvalidState(format!(
                "label {} outside {} classes",
                self.label, self.n_classes
            )));
        }
        let probs = softmax(&self.expectations(state)?);
        Ok(-probs[self.label].ln())
    }

    fn cotangent(&self, state: &Statevector) -> CoreResult<Vec<Complex64>> {
        if self.label >= self.n_classes {
            return Err(CoreError::InvalidState(format!(
                "label {} outside {} classes",
                self.label, self.n_classes
            )));
        }
        // ∂L/∂e_j = p_j − δ_{j,label} and ∂e_j/∂ψ* = Z_j ψ.
        let probs = softmax(&self.expectations(state)?);
        let mut lam = vec![Complex64::ZERO; state.dim()];
        for (j, &p) in probs.iter().enumerate() {
            let w = p - if j == self.label { 1.0 } else { 0.0 };
            let mask = state.qubit_mask(j);
            for (i, a) in state.amplitudes().iter().enumerate() {
                let sign = if i & mask == 0 { w } else { -w };
                lam[i] += sign * a;
            }
        }
        Ok(lam)
    }
}

/// Result of one adjoint pass.
pub struct GradientResult {
    /// Loss at the circuit output.
    pub value: f64,
    /// dL/dθ for each rotation gate, in gate order.
    pub gradients: Vec<f64>,
    /// Cotangent ∂L/∂ψ* pulled back to the circuit *input* — the hook for
    /// chaining gradients through an upstream encoder.
    pub input_cotangent: Vec<Complex64>,
}

/// Runs forward + adjoint sweeps of `circuit` on `input` under `loss`.
pub fn adjoint_gradient(
    circuit: &Circuit,
    input: &Statevector,
    loss: &dyn Loss,
) -> CoreResult<GradientResult> {
    let output = circuit.apply(input)?;
    let value = loss.value(&output)?;
    let mut lam = Statevector::from_raw_unchecked(output.n_qubits(), loss.cotangent(&output)?);
    let mut psi = output;
    let mut gradients = vec![0.0; circuit.parameter_count()];
    let mut grad_slot = gradients.len();

    for gate in circuit.gates.iter().rev() {
        if let Some(pauli) = rotation_pauli(gate) {
            // Gradient contribution before pulling back through this gate.
            let qubit = gate.qubits()[0];
            let mut p_psi = psi.clone();
            p_psi.apply_pauli_mut(qubit, pauli)?;
            let dot: Complex64 = lam
                .amplitudes()
                .iter()
                .zip(p_psi.amplitudes())
                .map(|(l, p)| l.conj() * p)
                .sum();
            grad_slot -= 1;
            gradients[grad_slot] = dot.im;
        }
        let inv = gate.inverse();
        psi.apply_gate_mut(&inv)?;
        lam.apply_gate_mut(&inv)?;
    }
    debug_assert_eq!(grad_slot, 0);

    Ok(GradientResult {
        value,
        gradients,
        input_cotangent: lam.into_amplitudes(),
    })
}

/// Convenience wrapper: binds `params` onto the circuit's rotation gates and
/// differentiates the loss with respect to them.
pub fn circuit_gradient(
    circuit: &Circuit,
    params: &[f64],
    input: &Statevector,
    loss: &dyn Loss,
) -> CoreResult<(f64, Vec<f64>)> {
    let bound = circuit.bind_parameters(params)?;
    let res = adjoint_gradient(&bound, input, loss)?;
    Ok((res.value, res.gradients))
}

fn rotation_pauli(gate: &Gate) -> Option<u8> {
    match gate {
        Gate::Rx { .. } => Some(1),
        Gate::Ry { .. } => Some(2),
        Gate::Rz { .. } => Some(3),
        _ => None,
    }
}

impl Statevector {
    /// Wraps a raw vector (not necessarily unit-norm) so the gate kernels can
    /// act on it. Used for cotangent propagation only.
    pub(crate) fn from_raw_unchecked(n_qubits: usize, amps: Vec<Complex64>) -> Statevector {
        debug_assert_eq!(amps.len(), 1 << n_qubits);
        let mut sv = Statevector::zero(n_qubits);
        sv.amplitudes_mut().copy_from_slice(&amps);
        sv
    }

    pub(crate) fn into_amplitudes(self) -> Vec<Complex64> {
        let mut amps = vec![Complex64::ZERO; self.dim()];
        amps.copy_from_slice(self.amplitudes());
        amps
    }
}
