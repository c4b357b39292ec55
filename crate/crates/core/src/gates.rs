//! Rotation gates and the map from model parameters `(J, d, t)` to gate angles.
//!
//! Every rotation uses the half-angle convention `exp(−iθG/2)`, for the
//! single-qubit `RX/RY/RZ` as well as the two-qubit `RXX/RYY/RZZ`. With ħ = 1,
//! `RXX(2Jt) = exp(−iJt σˣ⊗σˣ)`.

use std::fmt;

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{UnitaryMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub const ALL: [PauliAxis; 3] = [PauliAxis::X, PauliAxis::Y, PauliAxis::Z];

    pub fn index(self) -> usize {
        match self {
            PauliAxis::X => 0,
            PauliAxis::Y => 1,
            PauliAxis::Z => 2,
        }
    }

    pub fn pair(self) -> PairAxis {
        match self {
            PauliAxis::X => PairAxis::XX,
            PauliAxis::Y => PairAxis::YY,
            PauliAxis::Z => PairAxis::ZZ,
        }
    }
}

impl fmt::Display for PauliAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PauliAxis::X => "x",
            PauliAxis::Y => "y",
            PauliAxis::Z => "z",
        })
    }
}

impl std::str::FromStr for PauliAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "x" => Ok(PauliAxis::X),
            "y" => Ok(PauliAxis::Y),
            "z" => Ok(PauliAxis::Z),
            _ => Err(Error::invalid(format!("unknown Pauli axis {s:?}"))),
        }
    }
}

/// Same-axis two-qubit Pauli product `σᵏ⊗σᵏ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PairAxis {
    XX,
    YY,
    ZZ,
}

impl PairAxis {
    pub fn single(self) -> PauliAxis {
        match self {
            PairAxis::XX => PauliAxis::X,
            PairAxis::YY => PauliAxis::Y,
            PairAxis::ZZ => PauliAxis::Z,
        }
    }
}

pub fn pauli(axis: PauliAxis) -> UnitaryMatrix {
    let (o, l, i) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 1.0));
    UnitaryMatrix::from_rows2(match axis {
        PauliAxis::X => [[o, l], [l, o]],
        PauliAxis::Y => [[o, -i], [i, o]],
        PauliAxis::Z => [[l, o], [o, -l]],
    })
}

/// `[σˣ, σʸ, σᶻ]`.
pub fn pauli_matrices() -> [UnitaryMatrix; 3] {
    PauliAxis::ALL.map(pauli)
}

/// `exp(−i·angle·σ/2) = cos(angle/2)·I − i·sin(angle/2)·σ`.
pub fn rot_1q(axis: PauliAxis, angle: f64) -> UnitaryMatrix {
    half_angle_exp(&pauli(axis), angle)
}

/// `exp(−i·angle·σ⊗σ/2)`.
pub fn rot_2q(axis: PairAxis, angle: f64) -> UnitaryMatrix {
    let s = pauli(axis.single());
    half_angle_exp(&s.kron(&s), angle)
}

// Valid for any involutory generator (G² = I).
fn half_angle_exp(generator: &UnitaryMatrix, angle: f64) -> UnitaryMatrix {
    debug_assert!(angle.is_finite(), "rotation angle must be finite");
    let n = generator.dim();
    let (c, s) = ((angle / 2.0).cos(), (angle / 2.0).sin());
    let entries = generator
        .entries()
        .iter()
        .enumerate()
        .map(|(k, g)| {
            let diag = if k / n == k % n { c } else { 0.0 };
            C64::new(diag, 0.0) - C64::new(0.0, s) * g
        })
        .collect();
    UnitaryMatrix::from_entries(n, entries).expect("rotation of a finite angle")
}

/// Coupling `J`, anisotropy `d` and time `t` of
/// `H = J(σˣ₀σˣ₁ + σʸ₀σʸ₁ + d·σᶻ₀σᶻ₁)`, in units with ħ = 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    #[serde(rename = "J")]
    pub j: f64,
    pub d: f64,
    pub t: f64,
}

impl ModelParams {
    pub fn new(j: f64, d: f64, t: f64) -> Result<Self> {
        if !(j.is_finite() && d.is_finite() && t.is_finite()) {
            return Err(Error::invalid(format!("model parameters must be finite: J={j}, d={d}, t={t}")));
        }
        Ok(Self { j, d, t })
    }
}

/// Angles of the `RXX`, `RYY`, `RZZ` factors of the evolution operator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateAngles {
    pub ax: f64,
    pub ay: f64,
    pub az: f64,
}

impl GateAngles {
    pub const ZERO: GateAngles = GateAngles { ax: 0.0, ay: 0.0, az: 0.0 };

    pub fn new(ax: f64, ay: f64, az: f64) -> Result<Self> {
        if !(ax.is_finite() && ay.is_finite() && az.is_finite()) {
            return Err(Error::invalid("gate angles must be finite"));
        }
        Ok(Self { ax, ay, az })
    }

    /// XXZ angles `(α, α, d·α)`.
    pub fn xxz(alpha: f64, d: f64) -> Self {
        Self { ax: alpha, ay: alpha, az: d * alpha }
    }
}

/// `αx = αy = 2Jt`, `αz = 2Jdt`.
pub fn angles_from_model(p: &ModelParams) -> GateAngles {
    let a = 2.0 * p.j * p.t;
    GateAngles { ax: a, ay: a, az: 2.0 * p.j * p.d * p.t }
}

/// Two-site operator `A_q0 · B_q1` in the global basis where qubit 0 is the
/// least significant bit, so q1 is the leading Kronecker factor.
pub fn two_site_operator(on_q0: &UnitaryMatrix, on_q1: &UnitaryMatrix) -> Matrix4<C64> {
    let a = to_na2(on_q1);
    let b = to_na2(on_q0);
    let k = a.kronecker(&b);
    Matrix4::from_fn(|r, c| k[(r, c)])
}

fn to_na2(m: &UnitaryMatrix) -> nalgebra::Matrix2<C64> {
    nalgebra::Matrix2::from_fn(|r, c| m.get(r, c))
}

/// `cx·σˣσˣ + cy·σʸσʸ + cz·σᶻσᶻ` on two qubits.
pub fn pair_coupling(cx: f64, cy: f64, cz: f64) -> Matrix4<C64> {
    let [x, y, z] = pauli_matrices();
    two_site_operator(&x, &x) * C64::from(cx)
        + two_site_operator(&y, &y) * C64::from(cy)
        + two_site_operator(&z, &z) * C64::from(cz)
}

/// The XXZ Hamiltonian matrix for coupling `j` and anisotropy `d`.
pub fn xxz_hamiltonian(j: f64, d: f64) -> Matrix4<C64> {
    pair_coupling(j, j, j * d)
}
