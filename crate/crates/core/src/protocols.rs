//! Circuit builders for the measurement protocols: state preparation, XXZ
//! evolution, single-Pauli means, same-axis pair correlators and the echo.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{rot_1q, rot_2q, GateAngles, PairAxis, PauliAxis};
use crate::state::{StateVector, UnitaryMatrix};

/// Parameters of the separable state
/// `(cos(θ₀/2)|0⟩ + e^{iφ₀} sin(θ₀/2)|1⟩) ⊗ (cos(θ₁/2)|0⟩ + e^{iφ₁} sin(θ₁/2)|1⟩)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrepAngles {
    pub theta0: f64,
    pub theta1: f64,
    pub phi0: f64,
    pub phi1: f64,
}

impl PrepAngles {
    pub const ZERO: PrepAngles = PrepAngles { theta0: 0.0, theta1: 0.0, phi0: 0.0, phi1: 0.0 };

    pub fn new(theta0: f64, theta1: f64, phi0: f64, phi1: f64) -> Result<Self> {
        if ![theta0, theta1, phi0, phi1].iter().all(|x| x.is_finite()) {
            return Err(Error::invalid("preparation angles must be finite"));
        }
        Ok(Self { theta0, theta1, phi0, phi1 })
    }

    pub fn theta(&self, qubit: usize) -> f64 {
        if qubit == 0 { self.theta0 } else { self.theta1 }
    }

    pub fn phi(&self, qubit: usize) -> f64 {
        if qubit == 0 { self.phi0 } else { self.phi1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    RX,
    RY,
    RZ,
    RXX,
    RYY,
    RZZ,
}

impl Gate {
    pub fn arity(self) -> usize {
        match self {
            Gate::RX | Gate::RY | Gate::RZ => 1,
            Gate::RXX | Gate::RYY | Gate::RZZ => 2,
        }
    }

    pub fn matrix(self, angle: f64) -> UnitaryMatrix {
        match self {
            Gate::RX => rot_1q(PauliAxis::X, angle),
            Gate::RY => rot_1q(PauliAxis::Y, angle),
            Gate::RZ => rot_1q(PauliAxis::Z, angle),
            Gate::RXX => rot_2q(PairAxis::XX, angle),
            Gate::RYY => rot_2q(PairAxis::YY, angle),
            Gate::RZZ => rot_2q(PairAxis::ZZ, angle),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Gate::RX => "RX",
            Gate::RY => "RY",
            Gate::RZ => "RZ",
            Gate::RXX => "RXX",
            Gate::RYY => "RYY",
            Gate::RZZ => "RZZ",
        }
    }
}

impl FromStr for Gate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "RX" => Gate::RX,
            "RY" => Gate::RY,
            "RZ" => Gate::RZ,
            "RXX" => Gate::RXX,
            "RYY" => Gate::RYY,
            "RZZ" => Gate::RZZ,
            _ => return Err(Error::invalid(format!("unknown gate {s:?}"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GateOp {
    pub gate: Gate,
    pub angle: f64,
    pub targets: Vec<usize>,
}

/// An ordered list of rotations on `|0…0⟩` followed by a computational-basis
/// measurement of `measured` qubits. Ops apply left to right in time.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    ops: Vec<GateOp>,
    measured: Vec<usize>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > crate::state::MAX_QUBITS {
            return Err(Error::invalid(format!("unsupported qubit count {n_qubits}")));
        }
        Ok(Self { n_qubits, ops: Vec::new(), measured: Vec::new() })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn ops(&self) -> &[GateOp] {
        &self.ops
    }

    pub fn measured(&self) -> &[usize] {
        &self.measured
    }

    pub fn push(&mut self, gate: Gate, angle: f64, targets: &[usize]) -> Result<&mut Self> {
        if !angle.is_finite() {
            return Err(Error::invalid(format!("{} angle must be finite", gate.name())));
        }
        if targets.len() != gate.arity() {
            return Err(Error::invalid(format!("{} takes {} target(s)", gate.name(), gate.arity())));
        }
        self.check_targets(targets)?;
        if targets.len() == 2 && targets[0] == targets[1] {
            return Err(Error::invalid("two-qubit gate targets must differ"));
        }
        self.ops.push(GateOp { gate, angle, targets: targets.to_vec() });
        Ok(self)
    }

    pub fn measure(&mut self, qubits: &[usize]) -> Result<&mut Self> {
        self.check_targets(qubits)?;
        for (i, q) in qubits.iter().enumerate() {
            if qubits[..i].contains(q) {
                return Err(Error::invalid(format!("qubit {q} measured twice")));
            }
        }
        self.measured = qubits.to_vec();
        Ok(self)
    }

    /// Appends all ops of `other` (its measurement list is ignored).
    pub fn extend(&mut self, other: &Circuit) -> Result<&mut Self> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::invalid("cannot join circuits of different widths"));
        }
        self.ops.extend(other.ops.iter().cloned());
        Ok(self)
    }

    /// Final state before measurement.
    pub fn simulate(&self) -> Result<StateVector> {
        let mut s = StateVector::basis_state(self.n_qubits, &"0".repeat(self.n_qubits))?;
        for op in &self.ops {
            let u = op.gate.matrix(op.angle);
            match op.targets[..] {
                [q] => s.apply_1q_mut(&u, q)?,
                [a, b] => s.apply_2q_mut(&u, (a, b))?,
                _ => unreachable!("arity checked on push"),
            }
        }
        Ok(s)
    }

    /// Exact outcome distribution over `measured`, outcome bit `k` for `measured[k]`.
    pub fn exact_distribution(&self) -> Result<Vec<f64>> {
        if self.measured.is_empty() {
            return Err(Error::invalid("circuit measures no qubits"));
        }
        self.simulate()?.marginal_probabilities(&self.measured)
    }

    /// Line-oriented text form: `QUBITS n`, one `GATE angle targets...` line per
    /// op with 17 significant digits, then `MEASURE i j ...`.
    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| Error::invalid("empty circuit text"))?;
        let n = match header.split_whitespace().collect::<Vec<_>>()[..] {
            ["QUBITS", n] => n.parse::<usize>().map_err(|_| Error::invalid(format!("bad qubit count {n:?}")))?,
            _ => return Err(Error::invalid(format!("expected `QUBITS n`, got {header:?}"))),
        };
        let mut c = Circuit::new(n)?;
        for line in lines {
            let mut parts = line.split_whitespace();
            let head = parts.next().unwrap_or_default();
            let rest: Vec<&str> = parts.collect();
            let parse_idx = |s: &&str| s.parse::<usize>().map_err(|_| Error::invalid(format!("bad qubit index {s:?}")));
            if head == "MEASURE" {
                let qs = rest.iter().map(parse_idx).collect::<Result<Vec<_>>>()?;
                c.measure(&qs)?;
                continue;
            }
            let gate: Gate = head.parse()?;
            let (angle, targets) = rest.split_first().ok_or_else(|| Error::invalid(format!("missing angle in {line:?}")))?;
            let angle = angle.parse::<f64>().map_err(|_| Error::invalid(format!("bad angle {angle:?}")))?;
            let targets = targets.iter().map(parse_idx).collect::<Result<Vec<_>>>()?;
            c.push(gate, angle, &targets)?;
        }
        Ok(c)
    }

    fn check_targets(&self, qs: &[usize]) -> Result<()> {
        match qs.iter().find(|&&q| q >= self.n_qubits) {
            Some(q) => Err(Error::invalid(format!("qubit {q} out of range for {} qubits", self.n_qubits))),
            None => Ok(()),
        }
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "QUBITS {}", self.n_qubits)?;
        for op in &self.ops {
            write!(f, "{} {}", op.gate.name(), crate::fmt::sig(op.angle, 17))?;
            for t in &op.targets {
                write!(f, " {t}")?;
            }
            writeln!(f)?;
        }
        write!(f, "MEASURE")?;
        for q in &self.measured {
            write!(f, " {q}")?;
        }
        writeln!(f)
    }
}

/// `RY₀(θ₀)`, `RY₁(θ₁)`, then `RZ₀(φ₀)`, `RZ₁(φ₁)` on `|00⟩`. Equal to the
/// product state of [`PrepAngles`] up to the global phase `e^{−i(φ₀+φ₁)/2}`.
pub fn prep_circuit(a: &PrepAngles) -> Circuit {
    let mut c = Circuit::new(2).expect("two qubits");
    c.push(Gate::RY, a.theta0, &[0])
        .and_then(|c| c.push(Gate::RY, a.theta1, &[1]))
        .and_then(|c| c.push(Gate::RZ, a.phi0, &[0]))
        .and_then(|c| c.push(Gate::RZ, a.phi1, &[1]))
        .expect("finite preparation angles");
    c
}

/// Exact inverse of [`prep_circuit`].
pub fn unprep_circuit(a: &PrepAngles) -> Circuit {
    let mut c = Circuit::new(2).expect("two qubits");
    c.push(Gate::RZ, -a.phi0, &[0])
        .and_then(|c| c.push(Gate::RZ, -a.phi1, &[1]))
        .and_then(|c| c.push(Gate::RY, -a.theta0, &[0]))
        .and_then(|c| c.push(Gate::RY, -a.theta1, &[1]))
        .expect("finite preparation angles");
    c
}

/// `RZZ(αz)`, `RYY(αy)`, `RXX(αx)` on qubits (0, 1). The three commute; the
/// order is fixed so serialized circuits are stable.
pub fn evolution_circuit(g: &GateAngles) -> Circuit {
    let mut c = Circuit::new(2).expect("two qubits");
    c.push(Gate::RZZ, g.az, &[0, 1])
        .and_then(|c| c.push(Gate::RYY, g.ay, &[0, 1]))
        .and_then(|c| c.push(Gate::RXX, g.ax, &[0, 1]))
        .expect("finite gate angles");
    c
}

/// Rotation that maps a σ-axis measurement onto the computational basis:
/// none for z, `RY(−π/2)` for x, `RX(π/2)` for y.
pub fn basis_rotation(axis: PauliAxis) -> Option<(Gate, f64)> {
    match axis {
        PauliAxis::Z => None,
        PauliAxis::X => Some((Gate::RY, -FRAC_PI_2)),
        PauliAxis::Y => Some((Gate::RX, FRAC_PI_2)),
    }
}

fn push_basis_rotation(c: &mut Circuit, axis: PauliAxis, qubit: usize) -> Result<()> {
    if let Some((gate, angle)) = basis_rotation(axis) {
        c.push(gate, angle, &[qubit])?;
    }
    Ok(())
}

/// Prepare, evolve, rotate `qubit` into the `axis` basis and measure it.
/// `P(0) − P(1)` of the result is `⟨ψ(t)|σ^axis_qubit|ψ(t)⟩`.
pub fn pauli_measure_circuit(a: &PrepAngles, g: &GateAngles, qubit: usize, axis: PauliAxis) -> Result<Circuit> {
    if qubit > 1 {
        return Err(Error::invalid(format!("qubit {qubit} out of range for 2 qubits")));
    }
    let mut c = prep_circuit(a);
    c.extend(&evolution_circuit(g))?;
    push_basis_rotation(&mut c, axis, qubit)?;
    c.measure(&[qubit])?;
    Ok(c)
}

/// Prepare, rotate both qubits into the `axis` basis and measure both. The
/// parity `P(00) − P(01) − P(10) + P(11)` is `⟨σᵏ₀σᵏ₁⟩` on the prepared state.
pub fn correlator_circuit(a: &PrepAngles, axis: PauliAxis) -> Circuit {
    let mut c = prep_circuit(a);
    for q in 0..2 {
        push_basis_rotation(&mut c, axis, q).expect("valid qubit");
    }
    c.measure(&[0, 1]).expect("valid qubits");
    c
}

/// Prepare, evolve, undo the preparation and measure both qubits; `P(00)` is
/// the return probability `|⟨ψ₀|S|ψ₀⟩|²`.
pub fn echo_circuit(a: &PrepAngles, g: &GateAngles) -> Circuit {
    let mut c = prep_circuit(a);
    c.extend(&evolution_circuit(g)).expect("same width");
    c.extend(&unprep_circuit(a)).expect("same width");
    c.measure(&[0, 1]).expect("valid qubits");
    c
}
