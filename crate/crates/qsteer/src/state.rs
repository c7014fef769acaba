//! Dense N-qubit pure states, target-state construction, and reduced
//! density matrices.
//!
//! Basis convention: qubit 1 occupies the most significant bit of a
//! computational basis index, so `|b_1 b_2 .. b_N>` has index
//! `sum_k b_k 2^(N-k)`.

use crate::pauli::{Axis, Sign, ONE, ZERO};
use crate::{Result, SteerError};
use num_complex::Complex64;

const NORM_TOL: f64 = 1e-12;

/// A normalized pure state of `n` qubits.
#[derive(Clone, Debug)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>`.
    pub fn zero_state(n: usize) -> Self {
        assert!(n >= 1, "need at least one qubit");
        let mut amps = vec![ZERO; 1 << n];
        amps[0] = ONE;
        StateVector { n, amps }
    }

    /// Computational basis state from bits (qubit 1 first).
    pub fn basis_state(bits: &[u8]) -> Self {
        let n = bits.len();
        let mut idx = 0usize;
        for &b in bits {
            assert!(b <= 1, "bits must be 0 or 1");
            idx = (idx << 1) | b as usize;
        }
        let mut amps = vec![ZERO; 1 << n];
        amps[idx] = ONE;
        StateVector { n, amps }
    }

    /// Build from raw amplitudes and normalize.
    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 1 << n {
            return Err(SteerError::Dimension(format!(
                "expected {} amplitudes for {} qubits, got {}",
                1usize << n,
                n,
                amps.len()
            )));
        }
        let mut s = StateVector { n, amps };
        let norm = s.norm();
        if norm < NORM_TOL {
            return Err(SteerError::ZeroNorm);
        }
        for a in &mut s.amps {
            *a /= norm;
        }
        Ok(s)
    }

    /// Wrap raw amplitudes without normalizing (used for operator
    /// images, which are legitimately unnormalized).
    pub(crate) fn from_raw(n: usize, amps: Vec<Complex64>) -> Self {
        debug_assert_eq!(amps.len(), 1 << n);
        StateVector { n, amps }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Divide by the norm; errors on a numerically zero vector.
    pub fn normalized(mut self) -> Result<Self> {
        let norm = self.norm();
        if norm < NORM_TOL {
            return Err(SteerError::ZeroNorm);
        }
        for a in &mut self.amps {
            *a /= norm;
        }
        Ok(self)
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        assert_eq!(self.n, other.n);
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Overlap magnitude `|<target|self>|`.
    pub fn fidelity(&self, target: &StateVector) -> f64 {
        target.inner(self).norm()
    }

    /// Bit of `index` belonging to `qubit` (1-based).
    pub fn bit_of(&self, index: usize, qubit: usize) -> usize {
        (index >> (self.n - qubit)) & 1
    }

    /// Apply a single Pauli operator; pure (returns a new state).
    pub fn apply_pauli(&self, qubit: usize, axis: Axis) -> StateVector {
        assert!(qubit >= 1 && qubit <= self.n, "qubit out of range");
        let mask = 1usize << (self.n - qubit);
        let mut out = vec![ZERO; self.amps.len()];
        match axis {
            Axis::X => {
                for (i, &a) in self.amps.iter().enumerate() {
                    out[i ^ mask] = a;
                }
            }
            Axis::Y => {
                for (i, &a) in self.amps.iter().enumerate() {
                    let ph = if i & mask == 0 {
                        Complex64::new(0.0, 1.0)
                    } else {
                        Complex64::new(0.0, -1.0)
                    };
                    out[i ^ mask] = ph * a;
                }
            }
            Axis::Z => {
                for (i, &a) in self.amps.iter().enumerate() {
                    out[i] = if i & mask == 0 { a } else { -a };
                }
            }
        }
        StateVector { n: self.n, amps: out }
    }
}

/// Target (or initial) state families.
#[derive(Clone, Debug, PartialEq)]
pub enum TargetSpec {
    /// Computational basis product state, qubit 1 first.
    Product(Vec<u8>),
    /// Two-qubit Bell state labeled by parity `xi` (false: even,
    /// |00>/|11>; true: odd, |01>/|10>) and relative sign `eta`.
    Bell { xi: bool, eta: Sign },
    /// (|0..0> + |1..1>)/sqrt(2).
    Ghz,
    /// Uniform single-excitation superposition.
    W,
    /// `u |00> + e^{i theta} sqrt(1-u^2) |11>` on two qubits.
    BellType { u: f64, theta: f64 },
    /// Arbitrary amplitudes (normalized on construction).
    Custom(Vec<Complex64>),
}

/// Construct a member of the supported target families on `n` qubits.
pub fn make_target(n: usize, spec: &TargetSpec) -> Result<StateVector> {
    let dim = 1usize << n;
    match spec {
        TargetSpec::Product(bits) => {
            if bits.len() != n {
                return Err(SteerError::Dimension(format!(
                    "product spec has {} bits for {} qubits",
                    bits.len(),
                    n
                )));
            }
            if bits.iter().any(|&b| b > 1) {
                return Err(SteerError::InvalidParameter("product bits must be 0/1".into()));
            }
            Ok(StateVector::basis_state(bits))
        }
        TargetSpec::Bell { xi, eta } => {
            if n != 2 {
                return Err(SteerError::Dimension("Bell targets need exactly 2 qubits".into()));
            }
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let mut amps = vec![ZERO; 4];
            let (hi, lo) = if *xi { (0b01, 0b10) } else { (0b00, 0b11) };
            amps[hi] = Complex64::new(s, 0.0);
            amps[lo] = Complex64::new(eta.value() * s, 0.0);
            Ok(StateVector { n, amps })
        }
        TargetSpec::Ghz => {
            if n < 2 {
                return Err(SteerError::Dimension("GHZ needs at least 2 qubits".into()));
            }
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let mut amps = vec![ZERO; dim];
            amps[0] = Complex64::new(s, 0.0);
            amps[dim - 1] = Complex64::new(s, 0.0);
            Ok(StateVector { n, amps })
        }
        TargetSpec::W => {
            if n < 2 {
                return Err(SteerError::Dimension("W needs at least 2 qubits".into()));
            }
            let s = 1.0 / (n as f64).sqrt();
            let mut amps = vec![ZERO; dim];
            for k in 0..n {
                amps[1 << k] = Complex64::new(s, 0.0);
            }
            Ok(StateVector { n, amps })
        }
        TargetSpec::BellType { u, theta } => {
            if n != 2 {
                return Err(SteerError::Dimension("BellType targets need exactly 2 qubits".into()));
            }
            if !(0.0..=1.0).contains(u) {
                return Err(SteerError::InvalidParameter(format!(
                    "BellType weight u = {u} outside [0, 1]"
                )));
            }
            let mut amps = vec![ZERO; 4];
            amps[0] = Complex64::new(*u, 0.0);
            amps[3] = Complex64::from_polar((1.0 - u * u).sqrt(), *theta);
            Ok(StateVector { n, amps })
        }
        TargetSpec::Custom(amps) => StateVector::from_amplitudes(n, amps.clone()),
    }
}

/// Reduced density matrix on an ordered subset of qubits, stored dense
/// row-major.
#[derive(Clone, Debug)]
pub struct Rdm {
    kept: Vec<usize>,
    dim: usize,
    elems: Vec<Complex64>,
}

impl Rdm {
    pub fn kept_qubits(&self) -> &[usize] {
        &self.kept
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn element(&self, r: usize, c: usize) -> Complex64 {
        self.elems[r * self.dim + c]
    }

    pub fn elements(&self) -> &[Complex64] {
        &self.elems
    }

    pub(crate) fn from_parts(kept: Vec<usize>, dim: usize, elems: Vec<Complex64>) -> Self {
        Rdm { kept, dim, elems }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.element(i, i)).sum()
    }

    pub fn purity(&self) -> f64 {
        let mut acc = 0.0;
        for r in 0..self.dim {
            for c in 0..self.dim {
                acc += (self.element(r, c) * self.element(c, r)).re;
            }
        }
        acc
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.dim {
            for c in 0..self.dim {
                worst = worst.max((self.element(r, c) - self.element(c, r).conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues of the Hermitian matrix, ascending. Computed through
    /// the real symmetric embedding [[A, -B], [B, A]] of A + iB, whose
    /// spectrum is the doubled spectrum of the original matrix.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let d = self.dim;
        let mut m = nalgebra::DMatrix::<f64>::zeros(2 * d, 2 * d);
        for r in 0..d {
            for c in 0..d {
                let v = self.element(r, c);
                m[(r, c)] = v.re;
                m[(r + d, c + d)] = v.re;
                m[(r, c + d)] = -v.im;
                m[(r + d, c)] = v.im;
            }
        }
        let eig = nalgebra::SymmetricEigen::new(m);
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // Each eigenvalue appears twice in the embedding; keep one copy.
        vals.into_iter().step_by(2).collect()
    }

    /// Von Neumann entropy (natural log); eigenvalues below 1e-12 are
    /// treated as exact zeros.
    pub fn entropy(&self) -> f64 {
        self.eigenvalues()
            .iter()
            .filter(|&&l| l > 1e-12)
            .map(|&l| -l * l.ln())
            .sum()
    }
}

/// Partial trace of a pure state over the complement of `keep`
/// (1-based, strictly increasing, nonempty).
pub fn partial_trace(state: &StateVector, keep: &[usize]) -> Result<Rdm> {
    let n = state.n_qubits();
    if keep.is_empty() {
        return Err(SteerError::InvalidParameter("keep set is empty".into()));
    }
    if keep.windows(2).any(|w| w[0] >= w[1]) || keep[0] < 1 || *keep.last().unwrap() > n {
        return Err(SteerError::InvalidParameter(
            "keep set must be strictly increasing within 1..=N".into(),
        ));
    }
    let r = keep.len();
    let env: Vec<usize> = (1..=n).filter(|q| !keep.contains(q)).collect();
    let dim = 1usize << r;
    let mut elems = vec![ZERO; dim * dim];
    // Compose a full basis index from (kept pattern, environment pattern).
    let compose = |a: usize, e: usize| -> usize {
        let mut idx = 0usize;
        for (k, &q) in keep.iter().enumerate() {
            idx |= ((a >> (r - 1 - k)) & 1) << (n - q);
        }
        for (k, &q) in env.iter().enumerate() {
            idx |= ((e >> (env.len() - 1 - k)) & 1) << (n - q);
        }
        idx
    };
    for e in 0..(1usize << env.len()) {
        for a in 0..dim {
            let ia = compose(a, e);
            let ca = state.amplitudes()[ia];
            if ca == ZERO {
                continue;
            }
            for b in 0..dim {
                let ib = compose(b, e);
                elems[a * dim + b] += ca * state.amplitudes()[ib].conj();
            }
        }
    }
    Ok(Rdm::from_parts(keep.to_vec(), dim, elems))
}

/// Entanglement entropy of the bipartition `keep` vs the rest.
pub fn entanglement_entropy(state: &StateVector, keep: &[usize]) -> Result<f64> {
    Ok(partial_trace(state, keep)?.entropy())
}
