//! Gate vocabulary: the fixed basis {X, SX, RX, RY, RZ, CNOT} plus an
//! arbitrary two-qubit unitary payload (`U2Q`) used as an intermediate
//! before basis decomposition.
//!
//! Serialization follows a flat `{kind, qubits, params}` record; `U2Q`
//! matrices are stored row-major as interleaved `[re, im]` pairs.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, CoreResult};

/// Maximum deviation from unitarity tolerated for a `U2Q` payload.
pub const UNITARY_TOL: f64 = 1e-10;

/// One circuit gate. Rotation angles are in radians.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    X {
        qubit: usize,
    },
    Sx {
        qubit: usize,
    },
    Rx {
        qubit: usize,
        theta: f64,
    },
    Ry {
        qubit: usize,
        theta: f64,
    },
    Rz {
        qubit: usize,
        theta: f64,
    },
    Cnot {
        control: usize,
        target: usize,
    },
    U2Q {
        qubits: (usize, usize),
        matrix: Box<Matrix4<Complex64>>,
    },
}

impl Gate {
    /// Constructs a checked two-qubit unitary gate.
    pub fn u2q(qa: usize, qb: usize, matrix: Matrix4<Complex64>) -> CoreResult<Self> {
        if qa == qb {
            return Err(CoreError::InvalidGate("U2Q with repeated qubit".into()));
        }
        let dev = unitarity_deviation(&matrix);
        if dev > UNITARY_TOL {
            return Err(CoreError::NotUnitary { deviation: dev });
        }
        Ok(Gate::U2Q {
            qubits: (qa, qb),
            matrix: Box::new(matrix),
        })
    }

    /// The qubits this gate touches, in declaration order.
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::X { qubit }
            | Gate::Sx { qubit }
            | Gate::Rx { qubit, .. }
            | Gate::Ry { qubit, .. }
            | Gate::Rz { qubit, .. } => vec![*qubit],
            Gate::Cnot { control, target } => vec![*control, *target],
            Gate::U2Q { qubits, .. } => vec![qubits.0, qubits.1],
        }
    }

    /// Number of trainable (continuous) parameters.
    pub fn parameter_count(&self) -> usize {
        match self {
            Gate::Rx { .. } | Gate::Ry { .. } | Gate::Rz { .. } => 1,
            _ => 0,
        }
    }

    /// True for CNOT and U2Q.
    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::Cnot { .. } | Gate::U2Q { .. })
    }

    /// The 2×2 matrix of a single-qubit gate, if this is one.
    pub fn single_qubit_matrix(&self) -> Option<Matrix2<Complex64>> {
        match self {
            Gate::X { .. } => Some(x_matrix()),
            Gate::Sx { .. } => Some(sx_matrix()),
            Gate::Rx { theta, .. } => Some(rx_matrix(*theta)),
            Gate::Ry { theta, .. } => Some(ry_matrix(*theta)),
            Gate::Rz { theta, .. } => Some(rz_matrix(*theta)),
            _ => None,
        }
    }

    /// The inverse gate, staying inside the same gate vocabulary.
    /// SX⁻¹ is expressed as RX(−π/2), equal to SX† up to global phase.
    pub fn inverse(&self) -> Gate {
        match self {
            Gate::X { qubit } => Gate::X { qubit: *qubit },
            Gate::Sx { qubit } => Gate::Rx {
                qubit: *qubit,
                theta: -std::f64::consts::FRAC_PI_2,
            },
            Gate::Rx { qubit, theta } => Gate::Rx {
                qubit: *qubit,
                theta: -theta,
            },
            Gate::Ry { qubit, theta } => Gate::Ry {
                qubit: *qubit,
                theta: -theta,
            },
            Gate::Rz { qubit, theta } => Gate::Rz {
                qubit: *qubit,
                theta: -theta,
            },
            Gate::Cnot { control, target } => Gate::Cnot {
                control: *control,
                target: *target,
            },
            Gate::U2Q { qubits, matrix } => Gate::U2Q {
                qubits: *qubits,
                matrix: Box::new(matrix.adjoint()),
            },
        }
    }
}

/// Max elementwise deviation of M†M from the identity.
pub fn unitarity_deviation(m: &Matrix4<Complex64>) -> f64 {
    let prod = m.adjoint() * m;
    let mut dev: f64 = 0.0;
    for r in 0..4 {
        for c in 0..4 {
            let expect = if r == c {
                Complex64::ONE
            } else {
                Complex64::ZERO
            };
            dev = dev.max((prod[(r, c)] - expect).norm());
        }
    }
    dev
}

pub fn x_matrix() -> Matrix2<Complex64> {
    Matrix2::new(
        Complex64::ZERO,
        Complex64::ONE,
        Complex64::ONE,
        Complex64::ZERO,
    )
}

/// √X: squares to X, with SX|0⟩ = ((1+i)|0⟩ + (1−i)|1⟩)/2.
pub fn sx_matrix() -> Matrix2<Complex64> {
    let p = Complex64::new(0.5, 0.5);
    let m = Complex64::new(0.5, -0.5);
    Matrix2::new(p, m, m, p)
}

pub fn rx_matrix(theta: f64) -> Matrix2<Complex64> {
    let (s, c) = (theta / 2.0).sin_cos();
    Matrix2::new(
        Complex64::new(c, 0.0),
        Complex64::new(0.0, -s),
        Complex64::new(0.0, -s),
        Complex64::new(c, 0.0),
    )
}

pub fn ry_matrix(theta: f64) -> Matrix2<Complex64> {
    let (s, c) = (theta / 2.0).sin_cos();
    Matrix2::new(
        Complex64::new(c, 0.0),
        Complex64::new(-s, 0.0),
        Complex64::new(s, 0.0),
        Complex64::new(c, 0.0),
    )
}

pub fn rz_matrix(theta: f64) -> Matrix2<Complex64> {
    Matrix2::new(
        Complex64::from_polar(1.0, -theta / 2.0),
        Complex64::ZERO,
        Complex64::ZERO,
        Complex64::from_polar(1.0, theta / 2.0),
    )
}

/// CNOT as a 4×4 matrix in the (control, target) = (high bit, low bit)
/// ordering used by `U2Q` blocks: |c t⟩ → |c, t⊕c⟩.
pub fn cnot_matrix() -> Matrix4<Complex64> {
    let mut m = Matrix4::zeros();
    m[(0, 0)] = Complex64::ONE;
    m[(1, 1)] = Complex64::ONE;
    m[(2, 3)] = Complex64::ONE;
    m[(3, 2)] = Complex64::ONE;
    m
}

/// Flat record used for (de)serialization of gates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GateRecord {
    pub kind: String,
    pub qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<f64>,
}

impl From<&Gate> for GateRecord {
    fn from(gate: &Gate) -> Self {
        match gate {
            Gate::X { qubit } => GateRecord {
                kind: "x".into(),
                qubits: vec![*qubit],
                params: vec![],
            },
            Gate::Sx { qubit } => GateRecord {
                kind: "sx".into(),
                qubits: vec![*qubit],
                params: vec![],
            },
            Gate::Rx { qubit, theta } => GateRecord {
                kind: "rx".into(),
                qubits: vec![*qubit],
                params: vec![*theta],
            },
            Gate::Ry { qubit, theta } => GateRecord {
                kind: "ry".into(),
                qubits: vec![*qubit],
                params: vec![*theta],
            },
            Gate::Rz { qubit, theta } => GateRecord {
                kind: "rz".into(),
                qubits: vec![*qubit],
                params: vec![*theta],
            },
            Gate::Cnot { control, target } => GateRecord {
                kind: "cnot".into(),
                qubits: vec![*control, *target],
                params: vec![],
            },
            Gate::U2Q { qubits, matrix } => {
                let mut params = Vec::with_capacity(32);
                for r in 0..4 {
                    for c in 0..4 {
                        params.push(matrix[(r, c)].re);
                        params.push(matrix[(r, c)].im);
                    }
                }
                GateRecord {
                    kind: "u2q".into(),
                    qubits: vec![qubits.0, qubits.1],
                    params,
                }
            }
        }
    }
}

impl TryFrom<GateRecord> for Gate {
    type Error = CoreError;

    fn try_from(rec: GateRecord) -> CoreResult<Gate> {
        let need = |n: usize, p: usize| -> CoreResult<()> {
            if rec.qubits.len() != n || rec.params.len() != p {
                Err(CoreError::InvalidGate(format!(
                    "gate '{}' expects {n} qubit(s) and {p} param(s), got {} and {}",
                    rec.kind,
                    rec.qubits.len(),
                    rec.params.len()
                )))
            } else {
                Ok(())
            }
        };
        match rec.kind.as_str() {
            "x" => {
                need(1, 0)?;
                Ok(Gate::X {
                    qubit: rec.qubits[0],
                })
            }
            "sx" => {
                need(1, 0)?;
                Ok(Gate::Sx {
                    qubit: rec.qubits[0],
                })
            }
            "rx" => {
                need(1, 1)?;
                Ok(Gate::Rx {
                    qubit: rec.qubits[0],
                    theta: rec.params[0],
                })
            }
            "ry" => {
                need(1, 1)?;
                Ok(Gate::Ry {
                    qubit: rec.qubits[0],
                    theta: rec.params[0],
                })
            }
            "rz" => {
                need(1, 1)?;
                Ok(Gate::Rz {
                    qubit: rec.qubits[0],
                    theta: rec.params[0],
                })
            }
            "cnot" => {
                need(2, 0)?;
                Ok(Gate::Cnot {
                    control: rec.qubits[0],
                    target: rec.qubits[1],
                })
            }
            "u2q" => {
                need(2, 32)?;
                let mut m = Matrix4::zeros();
                for r in 0..4 {
                    for c in 0..4 {
                        let k = 2 * (r * 4 + c);
                        m[(r, c)] = Complex64::new(rec.params[k], rec.params[k + 1]);
                    }
                }
                Gate::u2q(rec.qubits[0], rec.qubits[1], m)
            }
            other => Err(CoreError::InvalidGate(format!(
                "unknown gate kind '{other}'"
            ))),
        }
    }
}

impl Serialize for Gate {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        GateRecord::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Gate {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rec = GateRecord::deserialize(deserializer)?;
        Gate::try_from(rec).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sx_matrix_squares_to_x() {
        let sq = sx_matrix() * sx_matrix();
        let dev = (sq - x_matrix())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(dev < 1e-12);
    }

    #[test]
    fn rotation_matrices_are_unitary() {
        for theta in [0.0, 0.7, -2.1, std::f64::consts::PI] {
            for m in [rx_matrix(theta), ry_matrix(theta), rz_matrix(theta)] {
                let dev = (m.adjoint() * m - Matrix2::identity())
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max);
                assert!(dev < 1e-12);
            }
        }
    }

    #[test]
    fn u2q_rejects_non_unitary() {
        let mut m = cnot_matrix();
        m[(0, 0)] = Complex64::new(2.0, 0.0);
        assert!(Gate::u2q(0, 1, m).is_err());
        assert!(Gate::u2q(1, 1, cnot_matrix()).is_err());
    }

    #[test]
    fn gate_json_round_trip() {
        let gates = vec![
            Gate::X { qubit: 2 },
            Gate::Sx { qubit: 0 },
            Gate::Rx {
                qubit: 1,
                theta: 0.25,
            },
            Gate::Ry {
                qubit: 1,
                theta: -1.5,
            },
            Gate::Rz {
                qubit: 0,
                theta: 3.0,
            },
            Gate::Cnot {
                control: 0,
                target: 1,
            },
            Gate::u2q(0, 1, cnot_matrix()).unwrap(),
        ];
        for g in gates {
            let json = serde_json::to_string(&g).unwrap();
            let back: Gate = serde_json::from_str(&json).unwrap();
            assert_eq!(g, back);
        }
    }

    #[test]
    fn inverse_composes_to_identity() {
        use crate::state::Statevector;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let s = Statevector::random(2, &mut rng);
        let gates = vec![
            Gate::Sx { qubit: 0 },
            Gate::Rx {
                qubit: 1,
                theta: 0.9,
            },
            Gate::Cnot {
                control: 1,
                target: 0,
            },
            Gate::u2q(0, 1, cnot_matrix()).unwrap(),
        ];
        for g in gates {
            let mut t = s.apply_gate(&g).unwrap();
            t.apply_gate_mut(&g.inverse()).unwrap();
            let fid = crate::state::fidelity(&s, &t).unwrap();
            assert!((fid - 1.0).abs() < 1e-10, "gate {g:?} fid {fid}");
        }
    }

    #[test]
    fn unknown_kind_rejected() {
        let rec = GateRecord {
            kind: "h".into(),
            qubits: vec![0],
            params: vec![],
        };
        assert!(Gate::try_from(rec).is_err());
    }
}
