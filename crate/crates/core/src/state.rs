//! Dense statevector and small unitary matrices.
//!
//! Basis indexing puts qubit 0 in the least significant bit: index = Σ_k bit_k·2^k.
//! Bitstrings are written qubit-0 first, so `"01"` means q0 = 0, q1 = 1 and maps to
//! index 2.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const MAX_QUBITS: usize = 10;
pub const NORM_TOL: f64 = 1e-12;
pub const UNITARY_TOL: f64 = 1e-12;

/// A 2×2 or 4×4 unitary stored row-major.
///
/// A 4×4 matrix acting on targets `(a, b)` is written in the `|a b⟩` basis with
/// `a` as the leading tensor factor, so `kron(A, B)` on `(a, b)` applies `A` to
/// `a` and `B` to `b`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix {
    dim: usize,
    entries: Vec<C64>,
}

impl UnitaryMatrix {
    /// Builds a matrix and checks `U†U = I` within [`UNITARY_TOL`].
    pub fn new(dim: usize, entries: Vec<C64>) -> Result<Self> {
        let m = Self::from_entries(dim, entries)?;
        let err = m.unitarity_error();
        if err > UNITARY_TOL {
            return Err(Error::invalid(format!(
                "matrix is not unitary (max |U†U - I| = {err:.3e})"
            )));
        }
        Ok(m)
    }

    pub(crate) fn from_entries(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if dim != 2 && dim != 4 {
            return Err(Error::invalid(format!("unitary dimension must be 2 or 4, got {dim}")));
        }
        if entries.len() != dim * dim {
            return Err(Error::invalid(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("matrix has non-finite entries"));
        }
        Ok(Self { dim, entries })
    }

    pub(crate) fn from_rows2(rows: [[C64; 2]; 2]) -> Self {
        Self { dim: 2, entries: rows.iter().flatten().copied().collect() }
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![C64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = C64::new(1.0, 0.0);
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[row * self.dim + col]
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut entries = vec![C64::new(0.0, 0.0); n * n];
        for r in 0..n {
            for c in 0..n {
                entries[c * n + r] = self.get(r, c).conj();
            }
        }
        Self { dim: n, entries }
    }

    /// Matrix product `self · rhs`.
    ///
    /// # Panics
    /// If the dimensions differ.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut entries = vec![C64::new(0.0, 0.0); n * n];
        for r in 0..n {
            for k in 0..n {
                let a = self.get(r, k);
                for c in 0..n {
                    entries[r * n + c] += a * rhs.get(k, c);
                }
            }
        }
        Self { dim: n, entries }
    }

    /// Kronecker product of two 2×2 matrices, `self` as the leading factor.
    ///
    /// # Panics
    /// If either operand is not 2×2.
    pub fn kron(&self, rhs: &Self) -> Self {
        assert!(self.dim == 2 && rhs.dim == 2, "kron is defined for 2x2 factors");
        let mut entries = vec![C64::new(0.0, 0.0); 16];
        for (ar, ac, br, bc) in iproduct4() {
            entries[(ar * 2 + br) * 4 + (ac * 2 + bc)] = self.get(ar, ac) * rhs.get(br, bc);
        }
        Self { dim: 4, entries }
    }

    /// Largest elementwise deviation of `U†U` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let p = self.adjoint().matmul(self);
        max_abs_diff(&p, &Self::identity(self.dim))
    }
}

fn iproduct4() -> impl Iterator<Item = (usize, usize, usize, usize)> {
    (0..16).map(|k| (k >> 3 & 1, k >> 2 & 1, k >> 1 & 1, k & 1))
}

/// Largest elementwise `|a_ij − b_ij|`.
pub fn max_abs_diff(a: &UnitaryMatrix, b: &UnitaryMatrix) -> f64 {
    assert_eq!(a.dim, b.dim, "dimension mismatch");
    a.entries.iter().zip(&b.entries).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Normalized amplitudes over the computational basis of `n_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// `|bits⟩`, with the leftmost character addressing qubit 0.
    pub fn basis_state(n_qubits: usize, bitstring: &str) -> Result<Self> {
        check_qubit_count(n_qubits)?;
        if bitstring.chars().count() != n_qubits {
            return Err(Error::invalid(format!(
                "bitstring {bitstring:?} has length {}, expected {n_qubits}",
                bitstring.chars().count()
            )));
        }
        let mut index = 0usize;
        for (k, ch) in bitstring.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => index |= 1 << k,
                other => {
                    return Err(Error::invalid(format!("non-binary character {other:?} in bitstring")))
                }
            }
        }
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n_qubits];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Wraps raw amplitudes, rescaling them to unit norm.
    pub fn from_amplitudes(n_qubits: usize, amps: Vec<C64>) -> Result<Self> {
        check_qubit_count(n_qubits)?;
        if amps.len() != 1 << n_qubits {
            return Err(Error::invalid(format!(
                "expected {} amplitudes for {n_qubits} qubits, got {}",
                1usize << n_qubits,
                amps.len()
            )));
        }
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("non-finite amplitude"));
        }
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::invalid("zero vector cannot be normalized"));
        }
        let amps = amps.into_iter().map(|z| z / norm).collect();
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn apply_1q(&self, u: &UnitaryMatrix, target: usize) -> Result<Self> {
        let mut out = self.clone();
        out.apply_1q_mut(u, target)?;
        Ok(out)
    }

    pub fn apply_1q_mut(&mut self, u: &UnitaryMatrix, target: usize) -> Result<()> {
        if u.dim() != 2 {
            return Err(Error::invalid("single-qubit gate needs a 2x2 matrix"));
        }
        self.check_qubit(target)?;
        let mask = 1usize << target;
        let (u00, u01, u10, u11) = (u.get(0, 0), u.get(0, 1), u.get(1, 0), u.get(1, 1));
        for i0 in (0..self.amps.len()).filter(|i| i & mask == 0) {
            let i1 = i0 | mask;
            let (a0, a1) = (self.amps[i0], self.amps[i1]);
            self.amps[i0] = u00 * a0 + u01 * a1;
            self.amps[i1] = u10 * a0 + u11 * a1;
        }
        Ok(())
    }

    pub fn apply_2q(&self, u: &UnitaryMatrix, targets: (usize, usize)) -> Result<Self> {
        let mut out = self.clone();
        out.apply_2q_mut(u, targets)?;
        Ok(out)
    }

    pub fn apply_2q_mut(&mut self, u: &UnitaryMatrix, targets: (usize, usize)) -> Result<()> {
        if u.dim() != 4 {
            return Err(Error::invalid("two-qubit gate needs a 4x4 matrix"));
        }
        let (a, b) = targets;
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Err(Error::invalid(format!("two-qubit gate targets must differ, got ({a}, {b})")));
        }
        let (ma, mb) = (1usize << a, 1usize << b);
        for base in (0..self.amps.len()).filter(|i| i & (ma | mb) == 0) {
            // local index = 2·bit(a) + bit(b)
            let idx = [base, base | mb, base | ma, base | ma | mb];
            let v = idx.map(|i| self.amps[i]);
            for (r, &gi) in idx.iter().enumerate() {
                self.amps[gi] = (0..4).map(|c| u.get(r, c) * v[c]).sum();
            }
        }
        Ok(())
    }

    /// `⟨self|other⟩`, conjugating `self`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::invalid(format!(
                "inner product of {}-qubit and {}-qubit states",
                self.n_qubits, other.n_qubits
            )));
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// Single-qubit Pauli means `(⟨σˣ⟩, ⟨σʸ⟩, ⟨σᶻ⟩)` of `qubit`, each taken as
    /// the sandwich `⟨ψ|σ|ψ⟩`.
    pub fn reduced_bloch(&self, qubit: usize) -> Result<[f64; 3]> {
        self.check_qubit(qubit)?;
        let mut r = [0.0; 3];
        for (k, sigma) in crate::gates::pauli_matrices().iter().enumerate() {
            let moved = self.apply_1q(sigma, qubit)?;
            r[k] = self.inner(&moved)?.re;
        }
        Ok(r)
    }

    /// Explicit partial trace down to `qubit`, row-major `[ρ00, ρ01, ρ10, ρ11]`.
    pub fn reduced_density_matrix(&self, qubit: usize) -> Result<[C64; 4]> {
        self.check_qubit(qubit)?;
        let mask = 1usize << qubit;
        let mut rho = [C64::new(0.0, 0.0); 4];
        for i0 in (0..self.amps.len()).filter(|i| i & mask == 0) {
            let (a0, a1) = (self.amps[i0], self.amps[i0 | mask]);
            rho[0] += a0 * a0.conj();
            rho[1] += a0 * a1.conj();
            rho[2] += a1 * a0.conj();
            rho[3] += a1 * a1.conj();
        }
        Ok(rho)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Outcome distribution over `qubits`; outcome `j` has bit `k` equal to the
    /// value of `qubits[k]`.
    pub fn marginal_probabilities(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        for &q in qubits {
            self.check_qubit(q)?;
        }
        let mut out = vec![0.0; 1 << qubits.len()];
        for (i, z) in self.amps.iter().enumerate() {
            let j = qubits.iter().enumerate().fold(0usize, |acc, (k, &q)| acc | ((i >> q & 1) << k));
            out[j] += z.norm_sqr();
        }
        Ok(out)
    }

    /// `|⟨self|other⟩|`, which is 1 exactly when the states agree up to a global phase.
    pub fn phase_invariant_overlap(&self, other: &Self) -> Result<f64> {
        Ok(self.inner(other)?.norm())
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(Error::invalid(format!(
                "qubit index {q} out of range for {} qubits",
                self.n_qubits
            )));
        }
        Ok(())
    }
}

fn check_qubit_count(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::invalid(format!("qubit count must be in 1..={MAX_QUBITS}, got {n}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{rot_1q, rot_2q, PauliAxis, PairAxis};
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn assert_amps(s: &StateVector, expected: &[C64], tol: f64) {
        for (i, (a, e)) in s.amplitudes().iter().zip(expected).enumerate() {
            assert!((a - e).norm() < tol, "amp {i}: {a} vs {e}");
        }
    }

    #[test]
    fn basis_state_indexing() {
        let s = StateVector::basis_state(2, "00").unwrap();
        assert_amps(&s, &[c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)], 0.0 + 1e-300);
        let s = StateVector::basis_state(2, "01").unwrap();
        assert_eq!(s.amplitudes()[2], c(1., 0.));
        let s = StateVector::basis_state(1, "1").unwrap();
        assert_eq!(s.amplitudes(), &[c(0., 0.), c(1., 0.)]);
    }

    #[test]
    fn basis_state_rejects_bad_input() {
        assert!(StateVector::basis_state(2, "0").is_err());
        assert!(StateVector::basis_state(2, "0a").is_err());
        assert!(StateVector::basis_state(0, "").is_err());
        assert!(StateVector::basis_state(11, "00000000000").is_err());
    }

    #[test]
    fn single_qubit_rotations_on_zero() {
        let zero = StateVector::basis_state(1, "0").unwrap();
        let s = zero.apply_1q(&rot_1q(PauliAxis::Y, PI), 0).unwrap();
        assert_amps(&s, &[c(0., 0.), c(1., 0.)], 1e-15);

        let phi = 0.7;
        let s = zero.apply_1q(&rot_1q(PauliAxis::Z, phi), 0).unwrap();
        assert_amps(&s, &[C64::from_polar(1.0, -phi / 2.0), c(0., 0.)], 1e-15);
    }

    #[test]
    fn ry_then_rz_matches_product_state_factor() {
        // Hand-multiplied: RZ(φ)·RY(θ)|0⟩ = (cos(θ/2)e^{-iφ/2}, sin(θ/2)e^{iφ/2}).
        let (theta, phi) = (1.1, 2.3);
        let s = StateVector::basis_state(1, "0")
            .unwrap()
            .apply_1q(&rot_1q(PauliAxis::Y, theta), 0)
            .unwrap()
            .apply_1q(&rot_1q(PauliAxis::Z, phi), 0)
            .unwrap();
        let expected = [
            C64::from_polar((theta / 2.0).cos(), -phi / 2.0),
            C64::from_polar((theta / 2.0).sin(), phi / 2.0),
        ];
        assert_amps(&s, &expected, 1e-15);
        // Same ray as cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩.
        let textbook = StateVector::from_amplitudes(
            1,
            vec![c((theta / 2.0).cos(), 0.), C64::from_polar((theta / 2.0).sin(), phi)],
        )
        .unwrap();
        assert!((s.phase_invariant_overlap(&textbook).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn two_qubit_rotation_examples() {
        let s00 = StateVector::basis_state(2, "00").unwrap();
        let theta = 0.9;
        let s = s00.apply_2q(&rot_2q(PairAxis::ZZ, theta), (0, 1)).unwrap();
        assert_amps(&s, &[C64::from_polar(1.0, -theta / 2.0), c(0., 0.), c(0., 0.), c(0., 0.)], 1e-15);

        let s = s00.apply_2q(&rot_2q(PairAxis::XX, PI), (0, 1)).unwrap();
        assert_amps(&s, &[c(0., 0.), c(0., 0.), c(0., 0.), c(0., -1.)], 1e-15);

        let psi = StateVector::from_amplitudes(2, vec![c(0.1, 0.2), c(-0.3, 0.4), c(0.5, 0.), c(0., -0.6)]).unwrap();
        let same = psi.apply_2q(&UnitaryMatrix::identity(4), (1, 0)).unwrap();
        assert_eq!(same, psi);
    }

    #[test]
    fn gate_target_errors() {
        let s = StateVector::basis_state(2, "00").unwrap();
        assert!(s.apply_1q(&rot_1q(PauliAxis::X, 0.1), 2).is_err());
        assert!(s.apply_2q(&rot_2q(PairAxis::XX, 0.1), (1, 1)).is_err());
        assert!(s.apply_2q(&rot_2q(PairAxis::XX, 0.1), (0, 2)).is_err());
        assert!(s.apply_1q(&rot_2q(PairAxis::XX, 0.1), 0).is_err());
    }

    #[test]
    fn inner_products() {
        let a = StateVector::basis_state(2, "00").unwrap();
        let b = StateVector::basis_state(2, "11").unwrap();
        assert_eq!(a.inner(&a).unwrap(), c(1., 0.));
        assert_eq!(a.inner(&b).unwrap(), c(0., 0.));
        let one = StateVector::basis_state(1, "0").unwrap();
        assert!(a.inner(&one).is_err());
    }

    #[test]
    fn bloch_vectors() {
        let zero = StateVector::basis_state(1, "0").unwrap();
        assert_eq!(zero.reduced_bloch(0).unwrap(), [0.0, 0.0, 1.0]);

        let bell = StateVector::from_amplitudes(2, vec![c(FRAC_1_SQRT_2, 0.), c(0., 0.), c(0., 0.), c(FRAC_1_SQRT_2, 0.)]).unwrap();
        for r in bell.reduced_bloch(0).unwrap() {
            assert!(r.abs() < 1e-15);
        }
        assert!(bell.reduced_bloch(2).is_err());

        // cos(2Jt)|01⟩ − i sin(2Jt)|10⟩: "01" is index 2, "10" is index 1.
        let jt: f64 = 0.37;
        let s = StateVector::from_amplitudes(
            2,
            vec![c(0., 0.), c(0., -(2.0 * jt).sin()), c((2.0 * jt).cos(), 0.), c(0., 0.)],
        )
        .unwrap();
        let r = s.reduced_bloch(0).unwrap();
        assert!(r[0].abs() < 1e-15 && r[1].abs() < 1e-15);
        assert!((r[2] - (4.0 * jt).cos()).abs() < 1e-15);
    }

    #[test]
    fn marginals_follow_measured_order() {
        let s = StateVector::basis_state(3, "011").unwrap();
        assert_eq!(s.marginal_probabilities(&[0]).unwrap(), vec![1.0, 0.0]);
        // outcome bit 0 <- q2 = 1, bit 1 <- q0 = 0
        assert_eq!(s.marginal_probabilities(&[2, 0]).unwrap(), vec![0.0, 1.0, 0.0, 0.0]);
    }

    fn arb_angle() -> impl Strategy<Value = f64> {
        -2.0 * PI..2.0 * PI
    }

    fn arb_state2() -> impl Strategy<Value = StateVector> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4)
            .prop_filter("nonzero", |v| v.iter().map(|(a, b)| a * a + b * b).sum::<f64>() > 1e-3)
            .prop_map(|v| StateVector::from_amplitudes(2, v.into_iter().map(|(a, b)| c(a, b)).collect()).unwrap())
    }

    proptest! {
        #[test]
        fn bloch_length_bounded(s in arb_state2()) {
            for q in 0..2 {
                let r = s.reduced_bloch(q).unwrap();
                prop_assert!(r.iter().map(|x| x * x).sum::<f64>() <= 1.0 + 1e-12);
            }
        }

        #[test]
        fn kron_equals_sequential_single_qubit_gates(
            s in arb_state2(),
            (ax, ay, bx, by) in (arb_angle(), arb_angle(), arb_angle(), arb_angle()),
        ) {
            let a = rot_1q(PauliAxis::X, ax).matmul(&rot_1q(PauliAxis::Y, ay));
            let b = rot_1q(PauliAxis::Z, bx).matmul(&rot_1q(PauliAxis::Y, by));
            let joint = s.apply_2q(&a.kron(&b), (0, 1)).unwrap();
            let seq = s.apply_1q(&a, 0).unwrap().apply_1q(&b, 1).unwrap();
            for (x, y) in joint.amplitudes().iter().zip(seq.amplitudes()) {
                prop_assert!((x - y).norm() < 1e-12);
            }
        }
    }
}
