//! Pauli primitives: axes, signs, sparse Pauli-sum operators, and the
//! small dense matrices used to push two-qubit operations through Bloch
//! tensors.
//!
//! Qubit labels are 1-based; qubit 1 maps to the most significant bit of
//! a basis index. Pauli components are indexed 0..=3 as (I, x, y, z).

use crate::state::StateVector;
use num_complex::Complex64;

pub const I: Complex64 = Complex64::new(0.0, 1.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// One of the three Pauli axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    /// Pauli component index: x -> 1, y -> 2, z -> 3.
    pub fn index(self) -> usize {
        match self {
            Axis::X => 1,
            Axis::Y => 2,
            Axis::Z => 3,
        }
    }

    pub fn from_index(i: usize) -> Option<Axis> {
        match i {
            1 => Some(Axis::X),
            2 => Some(Axis::Y),
            3 => Some(Axis::Z),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

/// A sign, used both for steering operator prefactors and for the Bell
/// outcome symmetry label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const ALL: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }

    pub fn flipped(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// Levi-Civita symbol over component indices 1..=3.
pub fn epsilon(a: usize, b: usize, c: usize) -> f64 {
    match (a, b, c) {
        (1, 2, 3) | (2, 3, 1) | (3, 1, 2) => 1.0,
        (3, 2, 1) | (1, 3, 2) | (2, 1, 3) => -1.0,
        _ => 0.0,
    }
}

/// The component index distinct from both arguments, if they are distinct
/// non-identity components.
pub fn third_axis(a: usize, b: usize) -> Option<usize> {
    if a == 0 || b == 0 || a == b || a > 3 || b > 3 {
        return None;
    }
    Some(6 - a - b)
}

/// 2x2 Pauli matrix for a component index (0 = identity), row-major.
pub fn pauli_matrix(mu: usize) -> [[Complex64; 2]; 2] {
    match mu {
        0 => [[ONE, ZERO], [ZERO, ONE]],
        1 => [[ZERO, ONE], [ONE, ZERO]],
        2 => [[ZERO, -I], [I, ZERO]],
        3 => [[ONE, ZERO], [ZERO, -ONE]],
        _ => panic!("pauli component out of range"),
    }
}

/// One product term `coeff * prod_k sigma_{q_k}^{a_k}` of a Pauli-sum
/// operator. Factors act on distinct qubits.
#[derive(Clone, Debug)]
pub struct PauliTerm {
    pub coeff: Complex64,
    pub factors: Vec<(usize, Axis)>,
}

impl PauliTerm {
    pub fn identity(coeff: Complex64) -> Self {
        PauliTerm { coeff, factors: Vec::new() }
    }

    pub fn single(coeff: Complex64, qubit: usize, axis: Axis) -> Self {
        PauliTerm { coeff, factors: vec![(qubit, axis)] }
    }

    pub fn pair(coeff: Complex64, q1: usize, a1: Axis, q2: usize, a2: Axis) -> Self {
        assert_ne!(q1, q2, "pair term must act on distinct qubits");
        PauliTerm { coeff, factors: vec![(q1, a1), (q2, a2)] }
    }
}

/// A sum of Pauli product terms. Measurement and steering operators stay
/// in this sparse form; they are never expanded to dense matrices on the
/// register.
#[derive(Clone, Debug, Default)]
pub struct PauliOp {
    pub terms: Vec<PauliTerm>,
}

impl PauliOp {
    pub fn new(terms: Vec<PauliTerm>) -> Self {
        PauliOp { terms }
    }

    /// `out += coeff * P |psi>` for a single product term.
    fn accumulate_term(term: &PauliTerm, psi: &StateVector, out: &mut [Complex64]) {
        let n = psi.n_qubits();
        let mut flip = 0usize;
        for &(q, ax) in &term.factors {
            if !matches!(ax, Axis::Z) {
                flip |= 1 << (n - q);
            }
        }
        for (i, &amp) in psi.amplitudes().iter().enumerate() {
            if amp == ZERO {
                continue;
            }
            let mut ph = term.coeff;
            for &(q, ax) in &term.factors {
                let bit = (i >> (n - q)) & 1;
                ph *= match ax {
                    Axis::X => ONE,
                    // <1|sigma_y|0> = i, <0|sigma_y|1> = -i
                    Axis::Y => {
                        if bit == 0 {
                            I
                        } else {
                            -I
                        }
                    }
                    Axis::Z => {
                        if bit == 0 {
                            ONE
                        } else {
                            -ONE
                        }
                    }
                };
            }
            out[i ^ flip] += ph * amp;
        }
    }

    /// Apply the operator; the result is generally unnormalized.
    pub fn apply(&self, psi: &StateVector) -> StateVector {
        let mut out = vec![ZERO; psi.dim()];
        for term in &self.terms {
            Self::accumulate_term(term, psi, &mut out);
        }
        StateVector::from_raw(psi.n_qubits(), out)
    }

    /// `<psi| O |psi>`.
    pub fn expectation(&self, psi: &StateVector) -> Complex64 {
        let applied = self.apply(psi);
        psi.inner(&applied)
    }

    /// Hermitian conjugate.
    pub fn adjoint(&self) -> PauliOp {
        PauliOp {
            terms: self
                .terms
                .iter()
                .map(|t| PauliTerm { coeff: t.coeff.conj(), factors: t.factors.clone() })
                .collect(),
        }
    }

    /// Dense 4x4 matrix of the operator restricted to qubits `(q1, q2)`,
    /// with q1 mapped to the high local bit. All factors must act on q1
    /// or q2.
    pub fn local_pair_matrix(&self, q1: usize, q2: usize) -> Mat4 {
        let mut m = Mat4::zero();
        for term in &self.terms {
            let mut mu1 = 0usize;
            let mut mu2 = 0usize;
            for &(q, ax) in &term.factors {
                if q == q1 {
                    mu1 = ax.index();
                } else if q == q2 {
                    mu2 = ax.index();
                } else {
                    panic!("term acts outside the requested pair");
                }
            }
            m.add_scaled(&Mat4::pauli_pair(mu1, mu2), term.coeff);
        }
        m
    }
}

/// Small dense 4x4 complex matrix used for two-qubit Pauli algebra.
#[derive(Clone, Debug)]
pub struct Mat4(pub [[Complex64; 4]; 4]);

impl Mat4 {
    pub fn zero() -> Self {
        Mat4([[ZERO; 4]; 4])
    }

    /// Kronecker product `sigma_mu1 (x) sigma_mu2` (high local bit first).
    pub fn pauli_pair(mu1: usize, mu2: usize) -> Self {
        let a = pauli_matrix(mu1);
        let b = pauli_matrix(mu2);
        let mut m = Mat4::zero();
        for r1 in 0..2 {
            for c1 in 0..2 {
                for r2 in 0..2 {
                    for c2 in 0..2 {
                        m.0[r1 * 2 + r2][c1 * 2 + c2] = a[r1][c1] * b[r2][c2];
                    }
                }
            }
        }
        m
    }

    pub fn add_scaled(&mut self, other: &Mat4, s: Complex64) {
        for r in 0..4 {
            for c in 0..4 {
                self.0[r][c] += s * other.0[r][c];
            }
        }
    }

    pub fn mul(&self, other: &Mat4) -> Mat4 {
        let mut m = Mat4::zero();
        for r in 0..4 {
            for c in 0..4 {
                let mut acc = ZERO;
                for k in 0..4 {
                    acc += self.0[r][k] * other.0[k][c];
                }
                m.0[r][c] = acc;
            }
        }
        m
    }

    pub fn adjoint(&self) -> Mat4 {
        let mut m = Mat4::zero();
        for r in 0..4 {
            for c in 0..4 {
                m.0[r][c] = self.0[c][r].conj();
            }
        }
        m
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2] + self.0[3][3]
    }
}

/// Expansion coefficients of `a * P_out * b` over the two-qubit Pauli
/// basis: `map[out][in] = (1/4) Tr(P_in * a * P_out * b)`, so that
/// `<a S b> = sum_in map[out][in] * R_in` for every background string.
///
/// Coefficients are returned as complex numbers; callers that know the
/// sandwiched observable is Hermitian take real parts after combining.
pub fn sandwich_map(a: &Mat4, b: &Mat4) -> [[Complex64; 16]; 16] {
    let basis: Vec<Mat4> = (0..16).map(|i| Mat4::pauli_pair(i / 4, i % 4)).collect();
    let mut map = [[ZERO; 16]; 16];
    for (out, p_out) in basis.iter().enumerate() {
        let m = a.mul(p_out).mul(b);
        for (inp, p_in) in basis.iter().enumerate() {
            map[out][inp] = p_in.mul(&m).trace() * 0.25;
        }
    }
    map
}

/// Real conjugation map of a (generally non-unitary) two-qubit operator
/// `o`: `map[out][in] = (1/4) Re Tr(P_in * o^dag * P_out * o)`. Applying
/// it to each 16-entry Bloch block computes the unnormalized update
/// `R'_S * <o^dag o>` of a state conditioned on `o`.
pub fn conjugation_map(o: &Mat4) -> [[f64; 16]; 16] {
    let raw = sandwich_map(&o.adjoint(), o);
    let mut map = [[0.0; 16]; 16];
    for r in 0..16 {
        for c in 0..16 {
            map[r][c] = raw[r][c].re;
        }
    }
    map
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epsilon_antisymmetry() {
        for a in 1..=3 {
            for b in 1..=3 {
                for c in 1..=3 {
                    assert_eq!(epsilon(a, b, c), -epsilon(b, a, c));
                }
            }
        }
        assert_eq!(epsilon(1, 2, 3), 1.0);
        assert_eq!(epsilon(2, 1, 3), -1.0);
    }

    #[test]
    fn third_axis_completes_triple() {
        assert_eq!(third_axis(1, 2), Some(3));
        assert_eq!(third_axis(3, 1), Some(2));
        assert_eq!(third_axis(2, 2), None);
        assert_eq!(third_axis(0, 1), None);
    }

    #[test]
    fn pauli_products_via_mat4() {
        // sigma_x sigma_y = i sigma_z on each slot.
        let x = Mat4::pauli_pair(1, 0);
        let y = Mat4::pauli_pair(2, 0);
        let z = Mat4::pauli_pair(3, 0);
        let xy = x.mul(&y);
        for r in 0..4 {
            for c in 0..4 {
                let want = I * z.0[r][c];
                assert!((xy.0[r][c] - want).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn apply_matches_matrix_on_two_qubits() {
        // (0.5 + 0.25i) * sigma_1^y sigma_2^x on a random-ish 2-qubit state.
        let op = PauliOp::new(vec![PauliTerm::pair(
            Complex64::new(0.5, 0.25),
            1,
            Axis::Y,
            2,
            Axis::X,
        )]);
        let psi = StateVector::from_amplitudes(
            2,
            vec![
                Complex64::new(0.3, 0.1),
                Complex64::new(-0.2, 0.4),
                Complex64::new(0.5, -0.3),
                Complex64::new(0.1, 0.6),
            ],
        )
        .unwrap();
        let m = op.local_pair_matrix(1, 2);
        let applied = op.apply(&psi);
        for r in 0..4 {
            let mut want = ZERO;
            for c in 0..4 {
                want += m.0[r][c] * psi.amplitudes()[c];
            }
            assert!((applied.amplitudes()[r] - want).norm() < 1e-14);
        }
    }
}
