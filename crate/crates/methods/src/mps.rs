//! Matrix-product-state disentangling synthesis.
//!
//! A statevector is factored into a chain of rank-3 site tensors by
//! repeated SVD. Disentangling then sweeps over adjacent site windows:
//! for each window the two-site reduced density matrix is diagonalized
//! and the unitary that rotates its dominant eigenvector onto |00> is
//! applied, concentrating weight on the all-zeros state. Running the
//! collected window gates backwards (inverted) from |0...0> prepares an
//! approximation of the original state whose accuracy grows with the
//! number of windows spent, so truncating the sweep trades fidelity for
//! CNOT count.
//!
//! Site `k` of the chain corresponds to qubit `k` (qubit 0 being the
//! high-order bit of the basis index), and window `k` covers qubits
//! `(k, k+1)`.

use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::time::Instant;

use crate::error::{MethodError, MethodResult};
use qprep_core::report::PrepReport;
use qprep_core::synthesis::{exact_prepare, transpile_to_basis};
use qprep_core::{fidelity, Circuit, Gate, Statevector};

/// Singular values below this fraction of the largest are discarded when
/// splitting tensors; this keeps bond ranks minimal without losing
/// fidelity at double precision.
const SPLIT_RELATIVE_TOL: f64 = 1e-12;

type M4 = Matrix4<Complex64>;

/// Rank-3 MPS site tensor with shape `(left, 2, right)`.
#[derive(Debug, Clone)]
pub struct SiteTensor {
    left: usize,
    right: usize,
    data: Vec<Complex64>,
}

impl SiteTensor {
    fn zeros(left: usize, right: usize) -> Self {
        Self {
            left,
            right,
            data: vec![Complex64::new(0.0, 0.0); left * 2 * right],
        }
    }

    #[inline]
    fn get(&self, l: usize, s: usize, r: usize) -> Complex64 {
        self.data[(l * 2 + s) * self.right + r]
    }

    #[inline]
    fn set(&mut self, l: usize, s: usize, r: usize, value: Complex64) {
        self.data[(l * 2 + s) * self.right + r] = value;
    }

    pub fn left_dim(&self) -> usize {
        self.left
    }

    pub fn right_dim(&self) -> usize {
        self.right
    }
}

/// Matrix product state over qubit sites.
#[derive(Debug, Clone)]
pub struct Mps {
    sites: Vec<SiteTensor>,
}

/// SVD with descending singular values, truncated to the relative
/// threshold and an optional rank cap. Returns `(u, s, v_t)` restricted
/// to the kept rank.
fn truncated_svd(
    m: DMatrix<Complex64>,
    max_rank: Option<usize>,
) -> MethodResult<(DMatrix<Complex64>, Vec<f64>, DMatrix<Complex64>)> {
    let mut svd = m.svd(true, true);
    svd.sort_by_singular_values();
    let u = svd
        .u
        .ok_or_else(|| MethodError::Numerical("SVD did not produce U".into()))?;
    let v_t = svd
        .v_t
        .ok_or_else(|| MethodError::Numerical("SVD did not produce V^T".into()))?;
    let s = svd.singular_values;
    let smax = s.iter().cloned().fold(0.0f64, f64::max);
    let mut rank = s
        .iter()
        .filter(|&&x| x > smax * SPLIT_RELATIVE_TOL)
        .count()
        .max(1);
    if let Some(cap) = max_rank {
        rank = rank.min(cap.max(1));
    }
    let u = u.columns(0, rank).into_owned();
    let v_t = v_t.rows(0, rank).into_owned();
    let s = s.iter().take(rank).cloned().collect();
    Ok((u, s, v_t))
}

/// Factors a statevector into a left-to-right MPS by repeated SVD.
/// `max_bond` optionally caps every bond rank (lossy compression);
/// without it the factorization is exact to double precision.
pub fn mps_from_statevector(state: &Statevector, max_bond: Option<usize>) -> MethodResult<Mps> {
    let n = state.n_qubits();
    let mut sites = Vec::with_capacity(n);
    let mut flat: Vec<Complex64> = state.amplitudes().to_vec();
    let mut bond = 1usize;
    let mut tail = flat.len();

    for _ in 0..n - 1 {
        let rows = bond * 2;
        let cols = tail / 2;
        let m = DMatrix::from_fn(rows, cols, |i, j| flat[i * cols + j]);
        let (u, s, v_t) = truncated_svd(m, max_bond)?;
        let rank = s.len();
        let mut site = SiteTensor::zeros(bond, rank);
        for l in 0..bond {
            for sp in 0..2 {
                for a in 0..rank {
                    site.set(l, sp, a, u[(l * 2 + sp, a)]);
                }
            }
        }
        sites.push(site);
        flat = (0..rank * cols)
            .map(|idx| {
                let (a, j) = (idx / cols, idx % cols);
                v_t[(a, j)] * Complex64::new(s[a], 0.0)
            })
            .collect();
        bond = rank;
        tail = cols;
    }

    let mut last = SiteTensor::zeros(bond, 1);
    for l in 0..bond {
        for sp in 0..2 {
            last.set(l, sp, 0, flat[l * 2 + sp]);
        }
    }
    sites.push(last);
    Ok(Mps { sites })
}

/// Contracts an MPS back into a dense statevector (renormalized, which
/// only matters after lossy compression).
pub fn mps_to_statevector(mps: &Mps) -> MethodResult<Statevector> {
    let mut v: Vec<Complex64> = vec![Complex64::new(1.0, 0.0)];
    let mut bond = 1usize;
    for site in &mps.sites {
        let prefix = v.len() / bond;
        let mut next = vec![Complex64::new(0.0, 0.0); prefix * 2 * site.right];
        for i in 0..prefix {
            for l in 0..bond {
                let amp = v[i * bond + l];
                if amp == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for s in 0..2 {
                    for r in 0..site.right {
                        next[(i * 2 + s) * site.right + r] += amp * site.get(l, s, r);
                    }
                }
            }
        }
        v = next;
        bond = site.right;
    }
    Ok(Statevector::from_unnormalized(v)?)
}

impl Mps {
    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    /// Bond dimension between site `k` and `k+1`, for `k` in `0..n-1`.
    pub fn bond_dimensions(&self) -> Vec<usize> {
        self.sites[..self.sites.len() - 1]
            .iter()
            .map(|s| s.right)
            .collect()
    }

    /// Squared overlap with the all-zeros basis state.
    pub fn zero_overlap_sqr(&self) -> f64 {
        let mut v: Vec<Complex64> = vec![Complex64::new(1.0, 0.0)];
        for site in &self.sites {
            let mut next = vec![Complex64::new(0.0, 0.0); site.right];
            for (l, &amp) in v.iter().enumerate() {
                for r in 0..site.right {
                    next[r] += amp * site.get(l, 0, r);
                }
            }
            v = next;
        }
        v[0].norm_sqr()
    }

    /// Left environment matrix `L[l, l']` accumulated over sites `0..k`.
    fn left_environment(&self, k: usize) -> DMatrix<Complex64> {
        let mut env = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        for site in &self.sites[..k] {
            let mut next = DMatrix::from_element(site.right, site.right, Complex64::new(0.0, 0.0));
            // next[a, b] = sum_{l, l', s} env[l, l'] A[l, s, a] conj(A[l', s, b])
            for l in 0..site.left {
                for lp in 0..site.left {
                    let e = env[(l, lp)];
                    if e == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for s in 0..2 {
                        for a in 0..site.right {
                            let x = e * site.get(l, s, a);
                            for b in 0..site.right {
                                next[(a, b)] += x * site.get(lp, s, b).conj();
                            }
                        }
                    }
                }
            }
            env = next;
        }
        env
    }

    /// Right environment matrix `R[r, r']` accumulated over sites `k..n`.
    fn right_environment(&self, k: usize) -> DMatrix<Complex64> {
        let mut env = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        for site in self.sites[k..].iter().rev() {
            let mut next = DMatrix::from_element(site.left, site.left, Complex64::new(0.0, 0.0));
            for r in 0..site.right {
                for rp in 0..site.right {
                    let e = env[(r, rp)];
                    if e == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for s in 0..2 {
                        for l in 0..site.left {
                            let x = e * site.get(l, s, r);
                            for lp in 0..site.left {
                                next[(l, lp)] += x * site.get(lp, s, rp).conj();
                            }
                        }
                    }
                }
            }
            env = next;
        }
        env
    }

    /// Two-site tensor `T[l, s*2+t, r]` for window `(k, k+1)`, stored as a
    /// vector indexed `(l * 4 + p) * right + r`.
    fn two_site_tensor(&self, k: usize) -> (Vec<Complex64>, usize, usize) {
        let a = &self.sites[k];
        let b = &self.sites[k + 1];
        let (dl, dr) = (a.left, b.right);
        let mut t = vec![Complex64::new(0.0, 0.0); dl * 4 * dr];
        for l in 0..dl {
            for s in 0..2 {
                for m in 0..a.right {
                    let x = a.get(l, s, m);
                    if x == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for tt in 0..2 {
                        for r in 0..dr {
                            t[(l * 4 + s * 2 + tt) * dr + r] += x * b.get(m, tt, r);
                        }
                    }
                }
            }
        }
        (t, dl, dr)
    }

    /// Reduced density matrix of the qubit pair `(k, k+1)`, indexed by
    /// `2*bit(k) + bit(k+1)`. Exact regardless of the chain's gauge
    /// because both environments are contracted honestly.
    pub fn two_site_rdm(&self, k: usize) -> MethodResult<M4> {
        if k + 1 >= self.sites.len() {
            return Err(MethodError::BadConfig(format!(
                "window {k} out of range for {} sites",
                self.sites.len()
            )));
        }
        let left = self.left_environment(k);
        let right = self.right_environment(k + 2);
        let (t, dl, dr) = self.two_site_tensor(k);

        // m[l, p, r'] = sum_r T[l, p, r] R[r, r']
        let drp = right.ncols();
        let mut m = vec![Complex64::new(0.0, 0.0); dl * 4 * drp];
        for l in 0..dl {
            for p in 0..4 {
                for r in 0..dr {
                    let x = t[(l * 4 + p) * dr + r];
                    if x == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for rp in 0..drp {
                        m[(l * 4 + p) * drp + rp] += x * right[(r, rp)];
                    }
                }
            }
        }
        // g[l', p, r'] = sum_l L[l, l'] m[l, p, r']
        let dlp = left.ncols();
        let mut g = vec![Complex64::new(0.0, 0.0); dlp * 4 * drp];
        for l in 0..dl {
            for lp in 0..dlp {
                let e = left[(l, lp)];
                if e == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for p in 0..4 {
                    for rp in 0..drp {
                        g[(lp * 4 + p) * drp + rp] += e * m[(l * 4 + p) * drp + rp];
                    }
                }
            }
        }
        // rho[p, p'] = sum_{l', r'} g[l', p, r'] conj(T[l', p', r'])
        let mut rho = M4::zeros();
        for lp in 0..dlp {
            for p in 0..4 {
                for rp in 0..drp {
                    let x = g[(lp * 4 + p) * drp + rp];
                    if x == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for pp in 0..4 {
                        rho[(p, pp)] += x * t[(lp * 4 + pp) * dr + rp].conj();
                    }
                }
            }
        }
        // Clean up Hermiticity to numerical precision.
        let rho = (rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
        Ok(rho)
    }

    /// Applies a 4x4 unitary to window `(k, k+1)` and re-splits the
    /// two-site tensor by SVD (exact up to the relative threshold).
    pub fn apply_window_gate(&mut self, k: usize, u: &M4) -> MethodResult<()> {
        let (t, dl, dr) = self.two_site_tensor(k);
        let mut applied = vec![Complex64::new(0.0, 0.0); dl * 4 * dr];
        for l in 0..dl {
            for p in 0..4 {
                for q in 0..4 {
                    let w = u[(p, q)];
                    if w == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for r in 0..dr {
                        applied[(l * 4 + p) * dr + r] += w * t[(l * 4 + q) * dr + r];
                    }
                }
            }
        }
        // Reshape (dl*2, 2*dr) with row l*2 + s and column t*dr + r.
        let m = DMatrix::from_fn(dl * 2, 2 * dr, |row, col| {
            let (l, s) = (row / 2, row % 2);
            let (tt, r) = (col / dr, col % dr);
            applied[(l * 4 + s * 2 + tt) * dr + r]
        });
        let (left, s, v_t) = truncated_svd(m, None)?;
        let rank = s.len();
        let mut site_a = SiteTensor::zeros(dl, rank);
        for l in 0..dl {
            for sp in 0..2 {
                for a in 0..rank {
                    site_a.set(l, sp, a, left[(l * 2 + sp, a)]);
                }
            }
        }
        let mut site_b = SiteTensor::zeros(rank, dr);
        for a in 0..rank {
            for tt in 0..2 {
                for r in 0..dr {
                    site_b.set(a, tt, r, v_t[(a, tt * dr + r)] * Complex64::new(s[a], 0.0));
                }
            }
        }
        self.sites[k] = site_a;
        self.sites[k + 1] = site_b;
        Ok(())
    }

    /// Computes and applies the disentangling gate for window `(k, k+1)`:
    /// the unitary whose rows are the conjugated eigenvectors of the
    /// window's reduced density matrix in descending eigenvalue order, so
    /// the dominant eigenvector lands on |00>.
    pub fn disentangle_window(&mut self, k: usize) -> MethodResult<M4> {
        let rho = self.two_site_rdm(k)?;
        let u = disentangling_gate(&rho);
        self.apply_window_gate(k, &u)?;
        Ok(u)
    }
}

/// Eigenvalues closer than this are treated as degenerate and ordered by
/// the lexicographic tie-break instead.
const EIGENVALUE_TIE_TOL: f64 = 1e-12;

/// Builds the rotation that maps the eigenbasis of a Hermitian 4x4 matrix
/// onto the computational basis, ordered by descending eigenvalue. Each
/// eigenvector's phase is fixed by making its largest-magnitude component
/// real and positive; degenerate eigenvalues are ordered by descending
/// lexicographic comparison of the fixed components, so the result is
/// deterministic even on symmetric inputs.
pub fn disentangling_gate(rho: &M4) -> M4 {
    let eig = nalgebra::linalg::SymmetricEigen::new(*rho);
    let mut vectors = [[Complex64::new(0.0, 0.0); 4]; 4];
    for (which, fixed) in vectors.iter_mut().enumerate() {
        let v = eig.eigenvectors.column(which);
        let mut pivot = 0usize;
        for i in 1..4 {
            if v[i].norm() > v[pivot].norm() {
                pivot = i;
            }
        }
        let phase = if v[pivot].norm() > 0.0 {
            v[pivot] / Complex64::new(v[pivot].norm(), 0.0)
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..4 {
            fixed[i] = v[i] * phase.conj();
        }
    }
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&i, &j| {
        let (li, lj) = (eig.eigenvalues[i], eig.eigenvalues[j]);
        if (li - lj).abs() > EIGENVALUE_TIE_TOL {
            return lj.partial_cmp(&li).expect("finite eigenvalues");
        }
        for c in 0..4 {
            let (a, b) = (vectors[i][c], vectors[j][c]);
            match b.re.partial_cmp(&a.re).expect("finite components") {
                std::cmp::Ordering::Equal => {}
                other => return other,
            }
            match b.im.partial_cmp(&a.im).expect("finite components") {
                std::cmp::Ordering::Equal => {}
                other => return other,
            }
        }
        std::cmp::Ordering::Equal
    });
    let mut u = M4::zeros();
    for (row, &which) in order.iter().enumerate() {
        for col in 0..4 {
            u[(row, col)] = vectors[which][col].conj();
        }
    }
    u
}

/// Order in which windows are visited within one sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepSchedule {
    /// Left to right: (0,1), (1,2), ..., (n-2, n-1).
    Sequential,
    /// Disjoint even windows first, then the bridging odd windows:
    /// (0,1), (2,3), ... followed by (1,2), (3,4), ...
    ParallelPairs,
}

impl SweepSchedule {
    pub fn windows(&self, n_sites: usize) -> Vec<usize> {
        match self {
            SweepSchedule::Sequential => (0..n_sites.saturating_sub(1)).collect(),
            SweepSchedule::ParallelPairs => {
                let mut order: Vec<usize> = (0..n_sites.saturating_sub(1)).step_by(2).collect();
                order.extend((1..n_sites.saturating_sub(1)).step_by(2));
                order
            }
        }
    }
}

/// Result of a disentangling run: window gates in application order.
#[derive(Debug, Clone)]
pub struct DisentangleOutcome {
    /// `(window, gate)` pairs in the order they were applied to the state.
    pub gates: Vec<(usize, M4)>,
    pub sweeps: usize,
    /// Squared overlap with |0...0> when the run stopped.
    pub zero_overlap_sqr: f64,
}

/// Sweeps window gates over the chain until the all-zeros overlap reaches
/// `target_fidelity` (checked after every window) or `max_sweeps` pass.
pub fn disentangle_sweep(
    mps: &mut Mps,
    schedule: SweepSchedule,
    target_fidelity: f64,
    max_sweeps: usize,
) -> MethodResult<DisentangleOutcome> {
    if !(target_fidelity > 0.0 && target_fidelity <= 1.0) {
        return Err(MethodError::BadTargetFidelity(target_fidelity));
    }
    let n = mps.n_sites();
    let mut gates = Vec::new();
    let mut overlap = mps.zero_overlap_sqr();
    // A hair of slack on the stopping rule so the dense re-verification
    // cannot land epsilon below the target the sweep stopped at.
    let stop_at = (target_fidelity + 1e-10).min(1.0 - 1e-13);
    let mut sweeps = 0;
    'sweeping: while sweeps < max_sweeps && overlap < stop_at {
        sweeps += 1;
        for k in schedule.windows(n) {
            let gate = mps.disentangle_window(k)?;
            gates.push((k, gate));
            overlap = mps.zero_overlap_sqr();
            if overlap >= stop_at {
                break 'sweeping;
            }
        }
    }
    Ok(DisentangleOutcome {
        gates,
        sweeps,
        zero_overlap_sqr: overlap,
    })
}

/// Configuration for [`mps_prepare`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MpsConfig {
    pub target_fidelity: f64,
    pub schedule: SweepSchedule,
    pub max_sweeps: usize,
    /// Optional bond cap applied when factoring the target state.
    pub max_bond: Option<usize>,
}

impl Default for MpsConfig {
    fn default() -> Self {
        Self {
            target_fidelity: 0.9,
            schedule: SweepSchedule::Sequential,
            max_sweeps: 16,
            max_bond: None,
        }
    }
}

/// Synthesizes a preparation circuit for `target` by MPS disentangling,
/// lowers it to the native gate set, and verifies the achieved fidelity
/// on a dense simulation.
pub fn mps_prepare(
    target: &Statevector,
    config: &MpsConfig,
) -> MethodResult<(Circuit, PrepReport)> {
    let started = Instant::now();
    let n = target.n_qubits();
    let mut sweeps = 0usize;
    let circuit = if n == 1 {
        exact_prepare(target)?
    } else {
        let mut mps = mps_from_statevector(target, config.max_bond)?;
        let outcome = disentangle_sweep(
            &mut mps,
            config.schedule,
            config.target_fidelity,
            config.max_sweeps,
        )?;
        sweeps = outcome.sweeps;
        let mut circuit = Circuit::new(n);
        for (k, u) in outcome.gates.iter().rev() {
            circuit.push(Gate::u2q(*k, *k + 1, u.adjoint())?)?;
        }
        circuit
    };
    let lowered = transpile_to_basis(&circuit)?;
    let prepared = lowered.simulate()?;
    let achieved = fidelity(&prepared, target)?;
    let report = PrepReport {
        method: "mps".into(),
        n_qubits: n,
        target_fidelity: config.target_fidelity,
        achieved_fidelity: achieved,
        met_target: achieved >= config.target_fidelity,
        cnot_count: lowered.raw_cnot_count(),
        total_gates: lowered.gate_count(),
        depth: lowered.depth(),
        iterations: sweeps,
        wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    Ok((lowered, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_state(n: usize, seed: u64) -> Statevector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Statevector::random(n, &mut rng)
    }

    #[test]
    fn round_trip_is_exact_without_cap() {
        for n in 2..=7 {
            let state = random_state(n, 100 + n as u64);
            let mps = mps_from_statevector(&state, None).unwrap();
            let back = mps_to_statevector(&mps).unwrap();
            let f = fidelity(&state, &back).unwrap();
            assert!(f > 1.0 - 1e-10, "n={n}: fidelity {f}");
        }
    }

    #[test]
    fn bond_dimensions_respect_entanglement() {
        // A basis state is a product state: every bond has rank 1.
        let mut amps = vec![Complex64::new(0.0, 0.0); 16];
        amps[5] = Complex64::new(1.0, 0.0);
        let state = Statevector::from_amplitudes(amps).unwrap();
        let mps = mps_from_statevector(&state, None).unwrap();
        assert!(mps.bond_dimensions().iter().all(|&d| d == 1));

        // GHZ has Schmidt rank 2 across every cut.
        let mut amps = vec![Complex64::new(0.0, 0.0); 16];
        amps[0] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        amps[15] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let ghz = Statevector::from_amplitudes(amps).unwrap();
        let mps = mps_from_statevector(&ghz, None).unwrap();
        assert!(mps.bond_dimensions().iter().all(|&d| d == 2));

        // Random states saturate min(2^{k+1}, 2^{n-1-k}).
        let state = random_state(5, 7);
        let mps = mps_from_statevector(&state, None).unwrap();
        let dims = mps.bond_dimensions();
        assert_eq!(dims, vec![2, 4, 4, 2]);
    }

    #[test]
    fn factorization_sites_are_left_isometries() {
        let state = random_state(5, 401);
        let mps = mps_from_statevector(&state, None).unwrap();
        for site in &mps.sites[..mps.sites.len() - 1] {
            for a in 0..site.right {
                for b in 0..site.right {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for l in 0..site.left {
                        for s in 0..2 {
                            acc += site.get(l, s, a).conj() * site.get(l, s, b);
                        }
                    }
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert!(
                        (acc - Complex64::new(want, 0.0)).norm() < 1e-10,
                        "isometry violated at ({a},{b}): {acc}"
                    );
                }
            }
        }
    }

    #[test]
    fn truncation_error_matches_dense_schmidt_oracle() {
        let n = 6;
        let state = random_state(n, 301);
        let cap = 4usize;
        let mps = mps_from_statevector(&state, Some(cap)).unwrap();
        assert!(mps.bond_dimensions().iter().any(|&d| d == cap));
        let back = mps_to_statevector(&mps).unwrap();
        let f = fidelity(&state, &back).unwrap();

        // Dense oracle: exact Schmidt spectra of every bipartition.
        let amps = state.amplitudes();
        let mut best_single_cut = f64::INFINITY;
        let mut discarded_total = 0.0;
        for k in 1..n {
            let rows = 1usize << k;
            let cols = (1usize << n) / rows;
            let m = DMatrix::from_fn(rows, cols, |i, j| amps[i * cols + j]);
            let svd = m.svd(false, false);
            let mut s: Vec<f64> = svd.singular_values.iter().cloned().collect();
            s.sort_by(|a, b| b.partial_cmp(a).expect("finite singular values"));
            let kept: f64 = s.iter().take(cap).map(|x| x * x).sum();
            let dropped: f64 = s.iter().skip(cap).map(|x| x * x).sum();
            best_single_cut = best_single_cut.min(kept);
            discarded_total += dropped;
        }
        // No rank-4 state can beat the optimal truncation at any single
        // cut, and sequential SVD loses at most twice the total discarded
        // weight.
        assert!(
            f <= best_single_cut + 1e-10,
            "fidelity {f} beats the single-cut optimum {best_single_cut}"
        );
        assert!(
            f >= 1.0 - 2.0 * discarded_total - 1e-10,
            "fidelity {f} below the sequential bound {}",
            1.0 - 2.0 * discarded_total
        );
    }

    #[test]
    fn one_sweep_disentangles_low_bond_targets_exactly() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut cases: Vec<(&str, Statevector)> = Vec::new();

        let mut amps = vec![Complex64::new(0.0, 0.0); 8];
        amps[0b010] = Complex64::new(1.0, 0.0);
        cases.push(("product |010>", Statevector::from_amplitudes(amps).unwrap()));

        let mut amps = vec![Complex64::new(0.0, 0.0); 4];
        amps[0] = Complex64::new(h, 0.0);
        amps[3] = Complex64::new(h, 0.0);
        cases.push(("bell", Statevector::from_amplitudes(amps).unwrap()));

        for n in [4usize, 6] {
            let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
            amps[0] = Complex64::new(h, 0.0);
            amps[(1 << n) - 1] = Complex64::new(h, 0.0);
            cases.push(("ghz", Statevector::from_amplitudes(amps).unwrap()));
        }

        // W states also have bond dimension 2 across every cut.
        let mut amps = vec![Complex64::new(0.0, 0.0); 16];
        for q in 0..4 {
            amps[1 << q] = Complex64::new(0.5, 0.0);
        }
        cases.push(("w4", Statevector::from_amplitudes(amps).unwrap()));

        for (name, target) in cases {
            let mps = mps_from_statevector(&target, None).unwrap();
            assert!(
                mps.bond_dimensions().iter().all(|&d| d <= 2),
                "{name}: not a bond-2 case"
            );
            let config = MpsConfig {
                target_fidelity: 1.0 - 1e-8,
                max_sweeps: 1,
                ..Default::default()
            };
            let (_, report) = mps_prepare(&target, &config).unwrap();
            assert!(
                report.achieved_fidelity >= 1.0 - 1e-8,
                "{name}: fidelity {}",
                report.achieved_fidelity
            );
            assert!(report.met_target, "{name}");
            assert!(report.iterations <= 1, "{name}: {} sweeps", report.iterations);
        }
    }

    #[test]
    fn bond_cap_truncates() {
        let state = random_state(5, 8);
        let mps = mps_from_statevector(&state, Some(2)).unwrap();
        assert!(mps.bond_dimensions().iter().all(|&d| d <= 2));
        // Lossy, but still a valid normalized state.
        let back = mps_to_statevector(&mps).unwrap();
        let f = fidelity(&state, &back).unwrap();
        assert!(f < 1.0 - 1e-6);
        assert!(f > 0.1);
    }

    #[test]
    fn two_site_rdm_matches_dense_oracle() {
        for n in 3..=6 {
            let state = random_state(n, 200 + n as u64);
            let mps = mps_from_statevector(&state, None).unwrap();
            for k in 0..n - 1 {
                let got = mps.two_site_rdm(k).unwrap();
                let want = state.reduced_density_matrix(k, 2).unwrap();
                let mut diff = 0.0f64;
                for i in 0..4 {
                    for j in 0..4 {
                        diff = diff.max((got[(i, j)] - want[(i, j)]).norm());
                    }
                }
                assert!(diff < 1e-10, "n={n} window {k}: rdm diff {diff}");
            }
        }
    }

    #[test]
    fn rdm_stays_exact_after_gates() {
        // After applying window gates the gauge is no longer canonical;
        // the environment-based RDM must still match the dense state.
        let state = random_state(4, 31);
        let mut mps = mps_from_statevector(&state, None).unwrap();
        let g0 = mps.disentangle_window(0).unwrap();
        let g1 = mps.disentangle_window(2).unwrap();

        let mut circuit = Circuit::new(4);
        circuit.push(Gate::u2q(0, 1, g0).unwrap()).unwrap();
        circuit.push(Gate::u2q(2, 3, g1).unwrap()).unwrap();
        let dense = circuit.apply(&state).unwrap();

        for k in 0..3 {
            let got = mps.two_site_rdm(k).unwrap();
            let want = dense.reduced_density_matrix(k, 2).unwrap();
            let mut diff = 0.0f64;
            for i in 0..4 {
                for j in 0..4 {
                    diff = diff.max((got[(i, j)] - want[(i, j)]).norm());
                }
            }
            assert!(diff < 1e-9, "window {k}: rdm diff {diff}");
        }
    }

    #[test]
    fn recorded_gates_match_dense_overlap() {
        let state = random_state(4, 53);
        let mut mps = mps_from_statevector(&state, None).unwrap();
        let outcome = disentangle_sweep(&mut mps, SweepSchedule::Sequential, 0.95, 6).unwrap();

        let mut circuit = Circuit::new(4);
        for (k, u) in &outcome.gates {
            circuit.push(Gate::u2q(*k, *k + 1, *u).unwrap()).unwrap();
        }
        let rotated = circuit.apply(&state).unwrap();
        let dense_overlap = rotated.amplitudes()[0].norm_sqr();
        assert!(
            (dense_overlap - outcome.zero_overlap_sqr).abs() < 1e-9,
            "MPS overlap {} vs dense {}",
            outcome.zero_overlap_sqr,
            dense_overlap
        );
    }

    #[test]
    fn disentangling_gate_orders_eigenvectors() {
        // Diagonal rho: the gate permutes basis states by weight.
        let mut rho = M4::zeros();
        rho[(0, 0)] = Complex64::new(0.1, 0.0);
        rho[(1, 1)] = Complex64::new(0.6, 0.0);
        rho[(2, 2)] = Complex64::new(0.2, 0.0);
        rho[(3, 3)] = Complex64::new(0.1, 0.0);
        let u = disentangling_gate(&rho);
        // Dominant eigenvector |01> must map to |00>.
        assert!((u[(0, 1)].norm() - 1.0).abs() < 1e-12);
        // Unitarity.
        let id = u.adjoint() * u;
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((id[(i, j)].norm() - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sweep_reaches_target_on_small_states() {
        for (n, seed) in [(3usize, 61u64), (4, 62), (5, 63)] {
            let state = random_state(n, seed);
            let mut mps = mps_from_statevector(&state, None).unwrap();
            let before = mps.zero_overlap_sqr();
            let outcome = disentangle_sweep(&mut mps, SweepSchedule::Sequential, 0.9, 16).unwrap();
            assert!(
                outcome.zero_overlap_sqr >= 0.9,
                "n={n}: overlap only {} after {} sweeps (started at {before})",
                outcome.zero_overlap_sqr,
                outcome.sweeps
            );
        }
    }

    #[test]
    fn parallel_schedule_also_converges() {
        let state = random_state(4, 71);
        let mut mps = mps_from_statevector(&state, None).unwrap();
        let outcome = disentangle_sweep(&mut mps, SweepSchedule::ParallelPairs, 0.9, 16).unwrap();
        assert!(outcome.zero_overlap_sqr >= 0.9);
    }

    #[test]
    fn schedule_window_orders() {
        assert_eq!(SweepSchedule::Sequential.windows(5), vec![0, 1, 2, 3]);
        assert_eq!(SweepSchedule::ParallelPairs.windows(5), vec![0, 2, 1, 3]);
        assert_eq!(SweepSchedule::ParallelPairs.windows(6), vec![0, 2, 4, 1, 3]);
    }

    #[test]
    fn prepare_meets_target_and_verifies_densely() {
        let state = random_state(4, 81);
        let config = MpsConfig {
            target_fidelity: 0.9,
            ..Default::default()
        };
        let (circuit, report) = mps_prepare(&state, &config).unwrap();
        assert!(report.met_target, "achieved {}", report.achieved_fidelity);
        assert!(report.achieved_fidelity >= 0.9);
        assert_eq!(report.method, "mps");
        assert_eq!(report.cnot_count, circuit.raw_cnot_count());
        assert!(circuit.gates.iter().all(|g| !matches!(g, Gate::U2Q { .. })));
        // Dense check one more time from the returned circuit itself.
        let prepared = circuit.simulate().unwrap();
        let f = fidelity(&prepared, &state).unwrap();
        assert!((f - report.achieved_fidelity).abs() < 1e-12);
    }

    #[test]
    fn tighter_target_costs_more_cnots() {
        let state = random_state(5, 91);
        let loose = MpsConfig {
            target_fidelity: 0.7,
            ..Default::default()
        };
        let tight = MpsConfig {
            target_fidelity: 0.99,
            ..Default::default()
        };
        let (_, loose_report) = mps_prepare(&state, &loose).unwrap();
        let (_, tight_report) = mps_prepare(&state, &tight).unwrap();
        assert!(loose_report.met_target);
        assert!(tight_report.met_target);
        assert!(loose_report.cnot_count <= tight_report.cnot_count);
    }

    #[test]
    fn single_qubit_target_falls_back_to_exact() {
        let state = random_state(1, 95);
        let (circuit, report) = mps_prepare(&state, &MpsConfig::default()).unwrap();
        assert!(report.achieved_fidelity > 1.0 - 1e-10);
        assert_eq!(circuit.raw_cnot_count(), 0);
    }

    #[test]
    fn rejects_bad_target() {
        let state = random_state(3, 97);
        let mut mps = mps_from_statevector(&state, None).unwrap();
        assert!(disentangle_sweep(&mut mps, SweepSchedule::Sequential, 0.0, 4).is_err());
        assert!(disentangle_sweep(&mut mps, SweepSchedule::Sequential, 1.5, 4).is_err());
    }
}
