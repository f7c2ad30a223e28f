//! ZYZ Euler-angle decomposition of single-qubit unitaries.
//!
//! Any 2x2 unitary factors as `e^{i*phase} Rz(phi) Ry(theta) Rz(lambda)`.
//! The emission helper appends at most three rotation gates, skipping
//! angles that are numerically zero.

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::circuit::Circuit;
use crate::error::CoreResult;
use crate::gate::Gate;

/// Angle below which a rotation is treated as the identity and skipped.
const ANGLE_CUTOFF: f64 = 1e-12;

/// Euler angles `(theta, phi, lambda)` plus a global phase such that the
/// source unitary equals `e^{i*phase} Rz(phi) Ry(theta) Rz(lambda)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZyzAngles {
    pub theta: f64,
    pub phi: f64,
    pub lambda: f64,
    pub phase: f64,
}

/// Computes the ZYZ Euler angles of an arbitrary 2x2 unitary.
///
/// The input is first projected to SU(2) by dividing out the determinant
/// phase; the extracted phase accounts for the difference.
pub fn zyz_decompose(u: &Matrix2<Complex64>) -> ZyzAngles {
    let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
    let phase = 0.5 * det.arg();
    let scale = (-Complex64::i() * phase).exp();
    let v00 = u[(0, 0)] * scale;
    let v10 = u[(1, 0)] * scale;
    let v11 = u[(1, 1)] * scale;

    let theta = 2.0 * v10.norm().atan2(v00.norm());
    let (phi, lambda) = if v10.norm() < ANGLE_CUTOFF {
        // Diagonal: V = diag(e^{-i*phi/2}, e^{i*phi/2}) up to rounding.
        (2.0 * v11.arg(), 0.0)
    } else if v00.norm() < ANGLE_CUTOFF {
        // Anti-diagonal: only phi - lambda is determined; fix lambda = 0.
        (2.0 * v10.arg(), 0.0)
    } else {
        let sigma = v11.arg();
        let delta = v10.arg();
        (sigma + delta, sigma - delta)
    };
    ZyzAngles {
        theta,
        phi,
        lambda,
        phase,
    }
}

/// Appends the rotation sequence realizing `u` on `qubit` (up to global
/// phase), skipping identity rotations. Returns the number of gates added.
pub fn append_zyz(
    circuit: &mut Circuit,
    qubit: usize,
    u: &Matrix2<Complex64>,
) -> CoreResult<usize> {
    let angles = zyz_decompose(u);
    let mut added = 0;
    if angles.lambda.abs() > ANGLE_CUTOFF {
        circuit.push(Gate::Rz {
            qubit,
            theta: angles.lambda,
        })?;
        added += 1;
    }
    if angles.theta.abs() > ANGLE_CUTOFF {
        circuit.push(Gate::Ry {
            qubit,
            theta: angles.theta,
        })?;
        added += 1;
    }
    if angles.phi.abs() > ANGLE_CUTOFF {
        circuit.push(Gate::Rz {
            qubit,
            theta: angles.phi,
        })?;
        added += 1;
    }
    Ok(added)
}
