//! Dense statevector representation and the primitive linear-algebra
//! operations on it: gate application, overlaps, observable expectations,
//! and reduced density matrices.
//!
//! Qubit ordering convention (fixed project-wide): **qubit 0 is the most
//! significant bit** of the computational-basis index. For a 3-qubit register
//! the basis state |q0 q1 q2⟩ = |011⟩ has index 0b011 = 3.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{CoreError, CoreResult};
use crate::gate::Gate;

/// Tolerance for the unit-norm invariant.
pub const NORM_TOL: f64 = 1e-10;

/// A pure quantum state as a dense vector of 2^n complex amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

/// A single-qubit Pauli-Z observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Observable {
    /// Index of the qubit the Z operator acts on.
    pub qubit: usize,
}

impl Statevector {
    /// The all-zeros state |0…0⟩ on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Self {
        assert!(n_qubits > 0, "statevector needs at least one qubit");
        assert!(n_qubits <= 24, "statevector dimension guard exceeded");
        let mut amps = vec![Complex64::ZERO; 1 << n_qubits];
        amps[0] = Complex64::ONE;
        Self { n_qubits, amps }
    }

    /// Builds a state from explicit amplitudes, validating length and norm.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> CoreResult<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(CoreError::InvalidState(format!(
                "amplitude count {len} is not a power of two ≥ 2"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        let norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > 1e-8 {
            return Err(CoreError::InvalidState(format!(
                "squared norm {norm_sq} deviates from 1"
            )));
        }
        Ok(Self { n_qubits, amps })
    }

    /// Builds a normalized state from an arbitrary nonzero vector.
    pub fn from_unnormalized(mut amps: Vec<Complex64>) -> CoreResult<Self> {
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(CoreError::InvalidState("zero vector".into()));
        }
        for a in &mut amps {
            *a /= norm;
        }
        Self::from_amplitudes(amps)
    }

    /// A Haar-ish random state: i.i.d. complex Gaussian amplitudes, normalized.
    pub fn random(n_qubits: usize, rng: &mut impl Rng) -> Self {
        // Box-Muller gives rotation-invariant Gaussian components, so the
        // normalized vector is uniform on the unit sphere.
        let dim = 1usize << n_qubits;
        let mut amps = Vec::with_capacity(dim);
        for _ in 0..dim {
            let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let r = (-2.0 * u1.ln()).sqrt();
            amps.push(Complex64::new(r * u2.cos(), r * u2.sin()));
        }
        Self::from_unnormalized(amps).expect("gaussian vector is nonzero")
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    /// Squared 2-norm of the amplitude vector (1 for a valid state).
    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Bit mask selecting `qubit` inside a basis index (qubit 0 = MSB).
    #[inline]
    pub fn qubit_mask(&self, qubit: usize) -> usize {
        1usize << (self.n_qubits - 1 - qubit)
    }

    fn check_qubit(&self, qubit: usize) -> CoreResult<()> {
        if qubit >= self.n_qubits {
            return Err(CoreError::QubitOutOfRange {
                index: qubit,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }

    /// Applies a gate in place.
    pub fn apply_gate_mut(&mut self, gate: &Gate) -> CoreResult<()> {
        for q in gate.qubits() {
            self.check_qubit(q)?;
        }
        match gate {
            Gate::X { qubit } => {
                let mask = self.qubit_mask(*qubit);
                for i in 0..self.amps.len() {
                    if i & mask == 0 {
                        self.amps.swap(i, i | mask);
                    }
                }
            }
            Gate::Cnot { control, target } => {
                if control == target {
                    return Err(CoreError::InvalidGate("CNOT with control = target".into()));
                }
                let cmask = self.qubit_mask(*control);
                let tmask = self.qubit_mask(*target);
                for i in 0..self.amps.len() {
                    if i & cmask != 0 && i & tmask == 0 {
                        self.amps.swap(i, i | tmask);
                    }
                }
            }
            Gate::U2Q { qubits, matrix } => {
                let (qa, qb) = *qubits;
                if qa == qb {
                    return Err(CoreError::InvalidGate("U2Q with repeated qubit".into()));
                }
                // Basis ordering of the 4×4 block: index = 2·bit(qa) + bit(qb).
                let amask = self.qubit_mask(qa);
                let bmask = self.qubit_mask(qb);
                let m = matrix.as_ref();
                for i in 0..self.amps.len() {
                    if i & amask == 0 && i & bmask == 0 {
                        let idx = [i, i | bmask, i | amask, i | amask | bmask];
                        let v = [
                            self.amps[idx[0]],
                            self.amps[idx[1]],
                            self.amps[idx[2]],
                            self.amps[idx[3]],
                        ];
                        for (row, &slot) in idx.iter().enumerate() {
                            let mut acc = Complex64::ZERO;
                            for (col, &vc) in v.iter().enumerate() {
                                acc += m[(row, col)] * vc;
                            }
                            self.amps[slot] = acc;
                        }
                    }
                }
            }
            _ => {
                // Remaining kinds are all single-qubit 2×2 matrices.
                let qubit = gate.qubits()[0];
                let m = gate
                    .single_qubit_matrix()
                    .expect("non-matrix kinds handled above");
                let mask = self.qubit_mask(qubit);
                for i in 0..self.amps.len() {
                    if i & mask == 0 {
                        let j = i | mask;
                        let a0 = self.amps[i];
                        let a1 = self.amps[j];
                        self.amps[i] = m[(0, 0)] * a0 + m[(0, 1)] * a1;
                        self.amps[j] = m[(1, 0)] * a0 + m[(1, 1)] * a1;
                    }
                }
            }
        }
        Ok(())
    }

    /// Pure-function form of gate application.
    pub fn apply_gate(&self, gate: &Gate) -> CoreResult<Statevector> {
        let mut out = self.clone();
        out.apply_gate_mut(gate)?;
        Ok(out)
    }

    /// Applies a Pauli operator (0 = I, 1 = X, 2 = Y, 3 = Z) to one qubit.
    pub fn apply_pauli_mut(&mut self, qubit: usize, pauli: u8) -> CoreResult<()> {
        self.check_qubit(qubit)?;
        let mask = self.qubit_mask(qubit);
        match pauli {
            0 => {}
            1 => {
                for i in 0..self.amps.len() {
                    if i & mask == 0 {
                        self.amps.swap(i, i | mask);
                    }
                }
            }
            2 => {
                let im = Complex64::I;
                for i in 0..self.amps.len() {
                    if i & mask == 0 {
                        let j = i | mask;
                        let a0 = self.amps[i];
                        let a1 = self.amps[j];
                        self.amps[i] = -im * a1;
                        self.amps[j] = im * a0;
                    }
                }
            }
            3 => {
                for i in 0..self.amps.len() {
                    if i & mask != 0 {
                        self.amps[i] = -self.amps[i];
                    }
                }
            }
            _ => {
                return Err(CoreError::InvalidGate(format!(
                    "pauli code {pauli} outside 0..=3"
                )))
            }
        }
        Ok(())
    }

    /// ⟨ψ|Z_q|ψ⟩ — always real for a normalized state.
    pub fn expectation_z(&self, qubit: usize) -> CoreResult<f64> {
        self.check_qubit(qubit)?;
        let mask = self.qubit_mask(qubit);
        let mut acc = 0.0;
        for (i, a) in self.amps.iter().enumerate() {
            let sign = if i & mask == 0 { 1.0 } else { -1.0 };
            acc += sign * a.norm_sqr();
        }
        Ok(acc)
    }

    /// Inner product ⟨self|other⟩.
    pub fn inner(&self, other: &Statevector) -> CoreResult<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(CoreError::DimensionMismatch {
                left: self.n_qubits,
                right: other.n_qubits,
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Reduced density matrix over a contiguous window of qubits
    /// [start, start+len), tracing out everything else.
    pub fn reduced_density_matrix(
        &self,
        start: usize,
        len: usize,
    ) -> CoreResult<DMatrix<Complex64>> {
        if len == 0 {
            return Err(CoreError::InvalidState("empty site window".into()));
        }
        self.check_qubit(start)?;
        self.check_qubit(start + len - 1)?;
        // Index layout (MSB-first): i = l · 2^(len+right) + w · 2^right + r,
        // where w runs over the window bits.
        let right = self.n_qubits - start - len;
        let wdim = 1usize << len;
        let rdim = 1usize << right;
        let ldim = 1usize << start;
        let mut rho = DMatrix::<Complex64>::zeros(wdim, wdim);
        let mut window = vec![Complex64::ZERO; wdim];
        for l in 0..ldim {
            for r in 0..rdim {
                for (w, slot) in window.iter_mut().enumerate() {
                    *slot = self.amps[(l << (len + right)) | (w << right) | r];
                }
                for a in 0..wdim {
                    for b in 0..wdim {
                        rho[(a, b)] += window[a] * window[b].conj();
                    }
                }
            }
        }
        Ok(rho)
    }
}

/// |⟨a|b⟩|² — symmetric and invariant under global phases.
pub fn fidelity(a: &Statevector, b: &Statevector) -> CoreResult<f64> {
    Ok(a.inner(b)?.norm_sqr())
}

/// ⟨ψ|Z_j|ψ⟩ for an [`Observable`].
pub fn expectation(state: &Statevector, obs: Observable) -> CoreResult<f64> {
    state.expectation_z(obs.qubit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::Gate;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn x_flips_basis_state() {
        let mut s = Statevector::zero(1);
        s.apply_gate_mut(&Gate::X { qubit: 0 }).unwrap();
        assert_abs_diff_eq!(s.amplitudes()[1].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.amplitudes()[0].norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn cnot_truth_table() {
        // |10⟩ → |11⟩ with control = qubit 0 (MSB).
        let mut s = Statevector::zero(2);
        s.apply_gate_mut(&Gate::X { qubit: 0 }).unwrap();
        s.apply_gate_mut(&Gate::Cnot {
            control: 0,
            target: 1,
        })
        .unwrap();
        assert_abs_diff_eq!(s.amplitudes()[0b11].re, 1.0, epsilon = 1e-12);
        // Control clear leaves the target alone: |01⟩ stays |01⟩.
        let mut s = Statevector::zero(2);
        s.apply_gate_mut(&Gate::X { qubit: 1 }).unwrap();
        s.apply_gate_mut(&Gate::Cnot {
            control: 0,
            target: 1,
        })
        .unwrap();
        assert_abs_diff_eq!(s.amplitudes()[0b01].re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ry_half_pi_makes_plus_state() {
        let mut s = Statevector::zero(1);
        s.apply_gate_mut(&Gate::Ry {
            qubit: 0,
            theta: FRAC_PI_2,
        })
        .unwrap();
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(s.amplitudes()[0].re, inv_sqrt2, epsilon = 1e-12);
        assert_abs_diff_eq!(s.amplitudes()[1].re, inv_sqrt2, epsilon = 1e-12);
    }

    #[test]
    fn sx_squares_to_x() {
        let mut s = Statevector::zero(1);
        s.apply_gate_mut(&Gate::Sx { qubit: 0 }).unwrap();
        s.apply_gate_mut(&Gate::Sx { qubit: 0 }).unwrap();
        // Up to global phase this is X|0⟩ = |1⟩.
        assert_abs_diff_eq!(s.amplitudes()[1].norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn norm_preserved_by_random_gates() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut s = Statevector::random(3, &mut rng);
        let gates = [
            Gate::Rx {
                qubit: 0,
                theta: 0.3,
            },
            Gate::Ry {
                qubit: 1,
                theta: -1.1,
            },
            Gate::Rz {
                qubit: 2,
                theta: 2.2,
            },
            Gate::Cnot {
                control: 1,
                target: 2,
            },
            Gate::X { qubit: 1 },
            Gate::Sx { qubit: 2 },
        ];
        for g in &gates {
            s.apply_gate_mut(g).unwrap();
            assert_abs_diff_eq!(s.norm_sqr(), 1.0, epsilon = NORM_TOL);
        }
    }

    #[test]
    fn fidelity_basics() {
        let zero = Statevector::zero(1);
        let mut one = Statevector::zero(1);
        one.apply_gate_mut(&Gate::X { qubit: 0 }).unwrap();
        assert_abs_diff_eq!(fidelity(&zero, &zero).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fidelity(&zero, &one).unwrap(), 0.0, epsilon = 1e-12);
        let plus = Statevector::from_amplitudes(vec![
            c(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            c(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        ])
        .unwrap();
        assert_abs_diff_eq!(fidelity(&zero, &plus).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn fidelity_global_phase_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = Statevector::random(3, &mut rng);
        let phase = Complex64::from_polar(1.0, 1.234);
        let rotated = Statevector::from_amplitudes(
            s.amplitudes().iter().map(|a| a * phase).collect::<Vec<_>>(),
        )
        .unwrap();
        assert_abs_diff_eq!(fidelity(&s, &rotated).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn expectation_z_basics() {
        let zero = Statevector::zero(1);
        assert_abs_diff_eq!(zero.expectation_z(0).unwrap(), 1.0, epsilon = 1e-12);
        let mut one = Statevector::zero(1);
        one.apply_gate_mut(&Gate::X { qubit: 0 }).unwrap();
        assert_abs_diff_eq!(one.expectation_z(0).unwrap(), -1.0, epsilon = 1e-12);
        let mut plus = Statevector::zero(1);
        plus.apply_gate_mut(&Gate::Ry {
            qubit: 0,
            theta: FRAC_PI_2,
        })
        .unwrap();
        assert_abs_diff_eq!(plus.expectation_z(0).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            expectation(&one, Observable { qubit: 0 }).unwrap(),
            -1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn rz_matches_phase_action() {
        let mut s = Statevector::from_amplitudes(vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        s.apply_gate_mut(&Gate::Rz {
            qubit: 0,
            theta: PI / 3.0,
        })
        .unwrap();
        let expected0 = c(0.6, 0.0) * Complex64::from_polar(1.0, -PI / 6.0);
        let expected1 = c(0.0, 0.8) * Complex64::from_polar(1.0, PI / 6.0);
        assert!((s.amplitudes()[0] - expected0).norm() < 1e-12);
        assert!((s.amplitudes()[1] - expected1).norm() < 1e-12);
    }

    /// Brute-force partial trace over explicit kept/traced index splits,
    /// written independently of `reduced_density_matrix`'s loop layout.
    fn partial_trace_brute_force(
        state: &Statevector,
        start: usize,
        len: usize,
    ) -> DMatrix<Complex64> {
        let n = state.n_qubits();
        let wdim = 1usize << len;
        let mut rho = DMatrix::<Complex64>::zeros(wdim, wdim);
        let traced: Vec<usize> = (0..n).filter(|q| *q < start || *q >= start + len).collect();
        let tdim = 1usize << traced.len();
        // Compose a full index from window bits `w` and traced bits `t`.
        let build = |w: usize, t: usize| -> usize {
            let mut idx = 0usize;
            for (pos, q) in (start..start + len).enumerate() {
                let bit = (w >> (len - 1 - pos)) & 1;
                idx |= bit << (n - 1 - q);
            }
            for (pos, q) in traced.iter().enumerate() {
                let bit = (t >> (traced.len() - 1 - pos)) & 1;
                idx |= bit << (n - 1 - q);
            }
            idx
        };
        for a in 0..wdim {
            for b in 0..wdim {
                let mut acc = Complex64::ZERO;
                for t in 0..tdim {
                    acc += state.amplitudes()[build(a, t)] * state.amplitudes()[build(b, t)].conj();
                }
                rho[(a, b)] = acc;
            }
        }
        rho
    }

    #[test]
    fn rdm_bell_state_is_maximally_mixed() {
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let bell = Statevector::from_amplitudes(vec![
            c(inv_sqrt2, 0.0),
            Complex64::ZERO,
            Complex64::ZERO,
            c(inv_sqrt2, 0.0),
        ])
        .unwrap();
        let rho = bell.reduced_density_matrix(0, 1).unwrap();
        assert!((rho[(0, 0)] - c(0.5, 0.0)).norm() < 1e-12);
        assert!((rho[(1, 1)] - c(0.5, 0.0)).norm() < 1e-12);
        assert!(rho[(0, 1)].norm() < 1e-12);
    }

    #[test]
    fn rdm_product_state_is_pure() {
        // |01⟩: qubit 0 in |0⟩.
        let mut s = Statevector::zero(2);
        s.apply_gate_mut(&Gate::X { qubit: 1 }).unwrap();
        let rho = s.reduced_density_matrix(0, 1).unwrap();
        assert!((rho[(0, 0)] - c(1.0, 0.0)).norm() < 1e-12);
        assert!(rho[(1, 1)].norm() < 1e-12);
    }

    #[test]
    fn rdm_matches_brute_force_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(999);
        for _ in 0..25 {
            let n = rng.gen_range(2..=4usize);
            let s = Statevector::random(n, &mut rng);
            let start = rng.gen_range(0..n);
            let len = rng.gen_range(1..=(n - start).min(3));
            let fast = s.reduced_density_matrix(start, len).unwrap();
            let slow = partial_trace_brute_force(&s, start, len);
            let max_dev = (&fast - &slow).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(max_dev < 1e-10, "deviation {max_dev}");
            // Contract: trace 1, Hermitian, PSD.
            let trace: Complex64 = (0..fast.nrows()).map(|i| fast[(i, i)]).sum();
            assert!((trace - Complex64::ONE).norm() < 1e-10);
            let herm_dev = (&fast - fast.adjoint())
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            assert!(herm_dev < 1e-10);
        }
    }

    #[test]
    fn pauli_codes_match_gate_actions() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let s = Statevector::random(2, &mut rng);
        // X via pauli code equals the X gate.
        let mut a = s.clone();
        a.apply_pauli_mut(0, 1).unwrap();
        let b = s.apply_gate(&Gate::X { qubit: 0 }).unwrap();
        assert!(a
            .amplitudes()
            .iter()
            .zip(b.amplitudes())
            .all(|(x, y)| (x - y).norm() < 1e-12));
        // Y² = I, Z² = I.
        let mut yy = s.clone();
        yy.apply_pauli_mut(1, 2).unwrap();
        yy.apply_pauli_mut(1, 2).unwrap();
        assert!(yy
            .amplitudes()
            .iter()
            .zip(s.amplitudes())
            .all(|(x, y)| (x - y).norm() < 1e-12));
    }

    #[test]
    fn invalid_inputs_error() {
        let s = Statevector::zero(2);
        assert!(s.expectation_z(2).is_err());
        assert!(s.apply_gate(&Gate::X { qubit: 5 }).is_err());
        let t = Statevector::zero(3);
        assert!(fidelity(&s, &t).is_err());
        assert!(Statevector::from_amplitudes(vec![c(1.0, 0.0); 3]).is_err());
        assert!(Statevector::from_amplitudes(vec![c(1.0, 0.0), c(1.0, 0.0)]).is_err());
    }
}
