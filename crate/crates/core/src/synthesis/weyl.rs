//! Weyl-chamber (canonical) decomposition of two-qubit unitaries.
//!
//! Every 4x4 unitary `U` factors as
//!
//! ```text
//! U = e^{i*phase} (K1l ⊗ K1r) · exp(i(a XX + b YY + c ZZ)) · (K2l ⊗ K2r)
//! ```
//!
//! with single-qubit unitaries `K*` and canonical coordinates folded into
//! the chamber `pi/4 >= a >= b >= |c|`. The algorithm diagonalizes the
//! symmetric matrix `M^T M` of the magic-basis image of `U` with a real
//! orthogonal transform, extracts the coordinates from the eigenphases,
//! and applies a fixed sequence of reflections to land in the chamber.
//! The Kronecker convention places the left factor on the high-order bit
//! of the index, matching the two-qubit gate convention used elsewhere.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::error::{CoreError, CoreResult};

type M2 = Matrix2<Complex64>;
type M4 = Matrix4<Complex64>;

/// Maximum elementwise residual accepted when validating the real
/// orthogonal diagonalization of `M^T M`.
const DIAGONALIZATION_TOL: f64 = 1.0e-13;

/// Number of random re-mixings of the real and imaginary parts attempted
/// before giving up on diagonalization.
const DIAGONALIZATION_ATTEMPTS: usize = 100;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Canonical two-qubit decomposition: coordinates, local factors, phase.
#[derive(Debug, Clone)]
pub struct WeylDecomposition {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub global_phase: f64,
    /// Left (high bit) factor applied after the canonical gate.
    pub k1l: M2,
    /// Right (low bit) factor applied after the canonical gate.
    pub k1r: M2,
    /// Left (high bit) factor applied before the canonical gate.
    pub k2l: M2,
    /// Right (low bit) factor applied before the canonical gate.
    pub k2r: M2,
}

/// Kronecker product of two 2x2 matrices; the left factor occupies the
/// high-order bit of the 4-dimensional index.
pub fn kron2(a: &M2, b: &M2) -> M4 {
    let mut out = M4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[(2 * i + k, 2 * j + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

/// `exp(i(a XX + b YY + c ZZ))`: the canonical interaction gate.
pub fn canonical_gate(a: f64, b: f64, cc: f64) -> M4 {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let xx = M4::from_fn(|i, j| if i + j == 3 { one } else { zero });
    let yy = M4::from_fn(|i, j| match (i, j) {
        (0, 3) | (3, 0) => -one,
        (1, 2) | (2, 1) => one,
        _ => zero,
    });
    let zz = M4::from_diagonal(&nalgebra::Vector4::new(one, -one, -one, one));
    let id = M4::identity();
    // XX, YY and ZZ commute and square to the identity, so each factor
    // exponentiates to cos + i*sin.
    let fx = id * c(a.cos(), 0.0) + xx * c(0.0, a.sin());
    let fy = id * c(b.cos(), 0.0) + yy * c(0.0, b.sin());
    let fz = id * c(cc.cos(), 0.0) + zz * c(0.0, cc.sin());
    fx * fy * fz
}

/// Magic (Bell) basis change, non-normalized form with its scaled adjoint.
fn magic_basis() -> M4 {
    M4::from_row_slice(&[
        c(1.0, 0.0),
        c(0.0, 1.0),
        c(0.0, 0.0),
        c(0.0, 0.0),
        c(0.0, 0.0),
        c(0.0, 0.0),
        c(0.0, 1.0),
        c(1.0, 0.0),
        c(0.0, 0.0),
        c(0.0, 0.0),
        c(0.0, 1.0),
        c(-1.0, 0.0),
        c(1.0, 0.0),
        c(0.0, -1.0),
        c(0.0, 0.0),
        c(0.0, 0.0),
    ])
}

fn magic_basis_scaled_adjoint() -> M4 {
    M4::from_row_slice(&[
        c(0.5, 0.0),
        c(0.0, 0.0),
        c(0.0, 0.0),
        c(0.5, 0.0),
        c(0.0, -0.5),
        c(0.0, 0.0),
        c(0.0, 0.0),
        c(0.0, 0.5),
        c(0.0, 0.0),
        c(0.0, -0.5),
        c(0.0, -0.5),
        c(0.0, 0.0),
        c(0.0, 0.0),
        c(0.5, 0.0),
        c(-0.5, 0.0),
        c(0.0, 0.0),
    ])
}

/// Conjugates out of the magic basis: `B† U B / 2`.
fn magic_out_of(u: &M4) -> M4 {
    magic_basis_scaled_adjoint() * u * magic_basis()
}

/// Conjugates into the magic basis: `B U B† / 2`.
fn magic_into(u: &M4) -> M4 {
    magic_basis() * u * magic_basis_scaled_adjoint()
}

/// i*Z, i*Y, i*X as SU(2) elements used by the chamber reflections.
fn ipz() -> M2 {
    Matrix2::new(c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -1.0))
}

fn ipy() -> M2 {
    Matrix2::new(c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0))
}

fn ipx() -> M2 {
    Matrix2::new(c(0.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), c(0.0, 0.0))
}

fn det2(m: &M2) -> Complex64 {
    m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
}

/// Splits a 4x4 unitary that is (up to phase) a tensor product of
/// single-qubit unitaries into `(left, right, phase)` with both factors in
/// SU(2), so that the input equals `e^{i*phase} left ⊗ right`.
pub fn decompose_two_qubit_product_gate(u: &M4) -> CoreResult<(M2, M2, f64)> {
    // Extract the low-bit factor from a 2x2 block with nonzero determinant.
    let mut r = Matrix2::new(u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)]);
    let mut det_r = det2(&r);
    if det_r.norm() < 0.1 {
        r = Matrix2::new(u[(2, 0)], u[(2, 1)], u[(3, 0)], u[(3, 1)]);
        det_r = det2(&r);
    }
    if det_r.norm() < 0.1 {
        return Err(CoreError::Numerical(
            "product-gate split failed: low-bit factor determinant below tolerance".into(),
        ));
    }
    let r = r / det_r.sqrt();

    let temp = u * kron2(&Matrix2::identity(), &r.adjoint());
    let l = Matrix2::new(temp[(0, 0)], temp[(0, 2)], temp[(2, 0)], temp[(2, 2)]);
    let det_l = det2(&l);
    if det_l.norm() < 0.9 {
        return Err(CoreError::Numerical(
            "product-gate split failed: high-bit factor determinant below tolerance".into(),
        ));
    }
    let l = l / det_l.sqrt();
    let phase = det_l.arg() / 2.0;
    Ok((l, r, phase))
}

fn complexify(m: &Matrix4<f64>) -> M4 {
    M4::from_fn(|i, j| c(m[(i, j)], 0.0))
}

fn max_elem_diff(a: &M4, b: &M4) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Computes the full canonical decomposition of an arbitrary two-qubit
/// unitary. The returned coordinates satisfy the Weyl chamber constraints
/// `pi/4 >= a >= b >= |c|` (with `c >= 0` unless `a = pi/4`).
pub fn weyl_decompose(unitary: &M4) -> CoreResult<WeylDecomposition> {
    let det_u = unitary.determinant();
    if (det_u.norm() - 1.0).abs() > 1e-6 {
        return Err(CoreError::NotUnitary {
            deviation: (det_u.norm() - 1.0).abs(),
        });
    }
    let mut global_phase = det_u.arg() / 4.0;
    let u = unitary * det_u.powf(-0.25);
    let up = magic_out_of(&u);
    let m2 = up.transpose() * up;

    // M^T M is complex symmetric and unitary, so its real and imaginary
    // parts commute and share a real orthogonal eigenbasis. A random mix
    // of the two parts generically has distinct eigenvalues; retry with a
    // fresh mix whenever the candidate basis fails to diagonalize M^T M.
    let mut rng = ChaCha8Rng::seed_from_u64(2023);
    let m2_re = m2.map(|z| z.re);
    let m2_im = m2.map(|z| z.im);
    let mut found: Option<(Matrix4<f64>, [f64; 4])> = None;
    for _ in 0..DIAGONALIZATION_ATTEMPTS {
        let mix_a: f64 = rng.gen_range(-1.0..1.0);
        let mix_b: f64 = rng.gen_range(-1.0..1.0);
        let candidate = m2_re * mix_a + m2_im * mix_b;
        let sym = nalgebra::linalg::SymmetricEigen::new(candidate);
        let p = sym.eigenvectors;
        let pc = complexify(&p);
        let diag = (pc.transpose() * m2 * pc).diagonal();
        let rebuilt = pc * M4::from_diagonal(&diag) * pc.transpose();
        if max_elem_diff(&rebuilt, &m2) <= DIAGONALIZATION_TOL {
            let angles = [diag[0].arg(), diag[1].arg(), diag[2].arg(), diag[3].arg()];
            found = Some((p, angles));
            break;
        }
    }
    let (mut p, eig_args) = found.ok_or_else(|| {
        CoreError::Numerical("canonical decomposition failed to diagonalize M^T M".into())
    })?;

    let mut d = [0.0f64; 4];
    for i in 0..3 {
        d[i] = -eig_args[i] / 2.0;
    }
    d[3] = -d[0] - d[1] - d[2];
    let mut cs = [0.0f64; 3];
    for i in 0..3 {
        cs[i] = ((d[i] + d[3]) / 2.0).rem_euclid(2.0 * PI);
    }

    // Sort coordinates by distance to the chamber boundary and rotate the
    // ordering so the eventual (a, b, c) assignment is canonical.
    let cstemp: Vec<f64> = cs
        .iter()
        .map(|&x| {
            let folded = x.rem_euclid(FRAC_PI_2);
            folded.min(FRAC_PI_2 - folded)
        })
        .collect();
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&i, &j| cstemp[i].partial_cmp(&cstemp[j]).expect("finite"));
    let order = [order[1], order[2], order[0]];

    let cs_old = cs;
    let d_old = d;
    let p_old = p;
    for i in 0..3 {
        cs[i] = cs_old[order[i]];
        d[i] = d_old[order[i]];
        p.set_column(i, &p_old.column(order[i]));
    }
    if p.determinant() < 0.0 {
        let last = -p.column(3);
        p.set_column(3, &last);
    }

    let pc = complexify(&p);
    let phase_diag = M4::from_diagonal(&nalgebra::Vector4::new(
        c(0.0, d[0]).exp(),
        c(0.0, d[1]).exp(),
        c(0.0, d[2]).exp(),
        c(0.0, d[3]).exp(),
    ));
    let k1 = magic_into(&(up * pc * phase_diag));
    let k2 = magic_into(&pc.transpose());

    let (mut k1l, mut k1r, phase_l) = decompose_two_qubit_product_gate(&k1)?;
    let (k2l, mut k2r, phase_r) = decompose_two_qubit_product_gate(&k2)?;
    global_phase += phase_l + phase_r;

    // Reflect into the canonical chamber, updating the local factors and
    // the global phase so the overall product is preserved.
    if cs[0] > FRAC_PI_2 {
        cs[0] -= 3.0 * FRAC_PI_2;
        k1l *= ipy();
        k1r *= ipy();
        global_phase += FRAC_PI_2;
    }
    if cs[1] > FRAC_PI_2 {
        cs[1] -= 3.0 * FRAC_PI_2;
        k1l *= ipx();
        k1r *= ipx();
        global_phase += FRAC_PI_2;
    }
    let mut conjs = 0;
    if cs[0] > FRAC_PI_4 {
        cs[0] = FRAC_PI_2 - cs[0];
        k1l *= ipy();
        k2r = ipy() * k2r;
        conjs += 1;
        global_phase -= FRAC_PI_2;
    }
    if cs[1] > FRAC_PI_4 {
        cs[1] = FRAC_PI_2 - cs[1];
        k1l *= ipx();
        k2r = ipx() * k2r;
        conjs += 1;
        global_phase += FRAC_PI_2;
        if conjs == 1 {
            global_phase -= PI;
        }
    }
    if cs[2] > FRAC_PI_2 {
        cs[2] -= 3.0 * FRAC_PI_2;
        k1l *= ipz();
        k1r *= ipz();
        global_phase += FRAC_PI_2;
        if conjs == 1 {
            global_phase -= PI;
        }
    }
    if conjs == 1 {
        cs[2] = FRAC_PI_2 - cs[2];
        k1l *= ipz();
        k2r = ipz() * k2r;
        global_phase += FRAC_PI_2;
    }
    if cs[2] > FRAC_PI_4 {
        cs[2] -= FRAC_PI_2;
        k1l *= ipz();
        k1r *= ipz();
        global_phase -= FRAC_PI_2;
    }

    Ok(WeylDecomposition {
        a: cs[1],
        b: cs[0],
        c: cs[2],
        global_phase,
        k1l,
        k1r,
        k2l,
        k2r,
    })
}

/// Canonical interaction coordinates `(a, b, c)` of a two-qubit unitary.
pub fn weyl_coordinates(unitary: &M4) -> CoreResult<[f64; 3]> {
    let w = weyl_decompose(unitary)?;
    Ok([w.a, w.b, w.c])
}
