//! Pauli-string (Bloch) tensors.
//!
//! A pure state rho = |psi><psi| is represented by the 4^N real
//! coefficients R_S = <S> over Pauli strings S. String indices are base-4
//! with qubit 1 as the most significant digit and components ordered
//! (I, x, y, z) = (0, 1, 2, 3). R at index 0 is always 1 and
//! sum_S R_S^2 = 2^N for pure states.

use crate::pauli::{conjugation_map, Axis, PauliOp, ZERO};
use crate::state::{Rdm, StateVector};
use crate::{Result, SteerError};
use num_complex::Complex64;

/// Dense Bloch tensor of an N-qubit state.
#[derive(Clone, Debug)]
pub struct BlochTensor {
    n: usize,
    r: Vec<f64>,
}

impl BlochTensor {
    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.r
    }

    pub fn get(&self, idx: usize) -> f64 {
        self.r[idx]
    }

    /// Place value of qubit `q`'s digit: index = sum_q mu_q * place(q).
    pub fn place(&self, q: usize) -> usize {
        1 << (2 * (self.n - q))
    }

    /// Pauli component of qubit `q` inside a string index.
    pub fn component_at(&self, idx: usize, q: usize) -> usize {
        (idx >> (2 * (self.n - q))) & 3
    }

    /// Index with qubit `q`'s component replaced.
    pub fn with_component(&self, idx: usize, q: usize, mu: usize) -> usize {
        let p = self.place(q);
        idx - self.component_at(idx, q) * p + mu * p
    }

    /// Single-qubit expectation <sigma_q^a>.
    pub fn single(&self, q: usize, a: Axis) -> f64 {
        self.r[a.index() * self.place(q)]
    }

    /// Two-point correlator <sigma_q1^a1 sigma_q2^a2>.
    pub fn correlator(&self, q1: usize, a1: Axis, q2: usize, a2: Axis) -> f64 {
        assert_ne!(q1, q2);
        self.r[a1.index() * self.place(q1) + a2.index() * self.place(q2)]
    }

    pub fn purity(&self) -> f64 {
        self.r.iter().map(|v| v * v).sum()
    }

    /// Number of non-identity components in a string index.
    pub fn support_size(&self, idx: usize) -> usize {
        let mut count = 0;
        let mut rest = idx;
        while rest != 0 {
            if rest & 3 != 0 {
                count += 1;
            }
            rest >>= 2;
        }
        count
    }

    /// Compute the full tensor from a state in O(N 4^N) by a per-qubit
    /// butterfly on the dense density matrix.
    pub fn from_state(psi: &StateVector) -> Self {
        let n = psi.n_qubits();
        let dim = psi.dim();
        // rho[row * dim + col] = psi_row * conj(psi_col)
        let mut rho = vec![ZERO; dim * dim];
        for (row, &ar) in psi.amplitudes().iter().enumerate() {
            if ar == ZERO {
                continue;
            }
            for (col, &ac) in psi.amplitudes().iter().enumerate() {
                rho[row * dim + col] = ar * ac.conj();
            }
        }
        // Per qubit, contract the (row bit, col bit) pair into a Pauli
        // component stored at slot (hi bit, lo bit) = (mu >> 1, mu & 1).
        for q in 1..=n {
            let sr = (1usize << (n - q)) * dim;
            let sc = 1usize << (n - q);
            let mut i = 0usize;
            while i < dim * dim {
                if i & sr == 0 && i & sc == 0 {
                    let m00 = rho[i];
                    let m01 = rho[i + sc];
                    let m10 = rho[i + sr];
                    let m11 = rho[i + sr + sc];
                    rho[i] = m00 + m11;
                    rho[i + sc] = m01 + m10;
                    rho[i + sr] = Complex64::new(0.0, 1.0) * (m01 - m10);
                    rho[i + sr + sc] = m00 - m11;
                }
                i += 1;
            }
        }
        // Gather into canonical base-4 order and check the imaginary
        // residue is numerical noise.
        let mut r = vec![0.0f64; dim * dim];
        for (idx, slot) in r.iter_mut().enumerate() {
            let mut row = 0usize;
            let mut col = 0usize;
            for q in 1..=n {
                let mu = (idx >> (2 * (n - q))) & 3;
                row |= (mu >> 1) << (n - q);
                col |= (mu & 1) << (n - q);
            }
            let v = rho[row * dim + col];
            debug_assert!(v.im.abs() < 1e-9, "imaginary residue {} in Bloch entry", v.im);
            *slot = v.re;
        }
        BlochTensor { n, r }
    }

    /// Direct expectation <psi| S |psi> for one string; the slow
    /// reference path for `from_state`.
    pub fn expectation_direct(psi: &StateVector, idx: usize) -> f64 {
        let n = psi.n_qubits();
        let mut cur = psi.clone();
        for q in 1..=n {
            let mu = (idx >> (2 * (n - q))) & 3;
            if let Some(ax) = Axis::from_index(mu) {
                cur = cur.apply_pauli(q, ax);
            }
        }
        psi.inner(&cur).re
    }

    /// Restrict to a subset of qubits: keep entries whose components
    /// vanish outside `keep`. This is the Bloch tensor of the reduced
    /// density matrix on `keep`.
    pub fn rdm_tensor(&self, keep: &[usize]) -> Result<RdmBloch> {
        if keep.is_empty() || keep.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SteerError::InvalidParameter(
                "keep set must be strictly increasing and nonempty".into(),
            ));
        }
        if keep[0] < 1 || *keep.last().unwrap() > self.n {
            return Err(SteerError::InvalidParameter("keep set outside register".into()));
        }
        let r = keep.len();
        let mut out = vec![0.0; 1 << (2 * r)];
        for (local, slot) in out.iter_mut().enumerate() {
            let mut idx = 0usize;
            for (k, &q) in keep.iter().enumerate() {
                let mu = (local >> (2 * (r - 1 - k))) & 3;
                idx += mu * self.place(q);
            }
            *slot = self.r[idx];
        }
        Ok(RdmBloch { kept: keep.to_vec(), r: out })
    }

    /// Exact in-place update under a (generally non-unitary) operator
    /// supported on qubits `(q1, q2)`, given its local 4x4 matrix. The
    /// conjugation acts within each 16-entry component block, so the full
    /// tensor is refreshed in one pass; the identity entry accumulates
    /// <o^dag o> and is divided out, matching exact state renormalization.
    pub fn apply_pair_op(&mut self, q1: usize, q2: usize, op: &PauliOp) -> Result<f64> {
        assert_ne!(q1, q2);
        let map = conjugation_map(&op.local_pair_matrix(q1, q2));
        let p1 = self.place(q1);
        let p2 = self.place(q2);
        let others: Vec<usize> = (1..=self.n).filter(|&q| q != q1 && q != q2).collect();
        let n_bg = 1usize << (2 * others.len());
        let mut block = [0.0f64; 16];
        for bg in 0..n_bg {
            let mut base = 0usize;
            for (k, &q) in others.iter().enumerate() {
                let mu = (bg >> (2 * (others.len() - 1 - k))) & 3;
                base += mu * self.place(q);
            }
            for (slot, b) in block.iter_mut().enumerate() {
                *b = self.r[base + (slot / 4) * p1 + (slot % 4) * p2];
            }
            for out in 0..16 {
                let row = &map[out];
                let mut acc = 0.0;
                for (slot, b) in block.iter().enumerate() {
                    acc += row[slot] * b;
                }
                self.r[base + (out / 4) * p1 + (out % 4) * p2] = acc;
            }
        }
        let weight = self.r[0];
        if weight < 1e-14 {
            return Err(SteerError::ZeroProbabilityBranch);
        }
        let inv = 1.0 / weight;
        for v in &mut self.r {
            *v *= inv;
        }
        Ok(weight)
    }

    /// Largest absolute entry-wise deviation from the tensor of `psi`.
    pub fn deviation_from_state(&self, psi: &StateVector) -> f64 {
        let fresh = BlochTensor::from_state(psi);
        self.r
            .iter()
            .zip(&fresh.r)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Bloch tensor of a reduced density matrix.
#[derive(Clone, Debug)]
pub struct RdmBloch {
    kept: Vec<usize>,
    r: Vec<f64>,
}

impl RdmBloch {
    pub fn kept_qubits(&self) -> &[usize] {
        &self.kept
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.r
    }

    /// Reconstruct the dense reduced density matrix
    /// rho = 2^-r sum_S R_S S via the inverse per-qubit butterfly.
    pub fn to_matrix(&self) -> Rdm {
        let r = self.kept.len();
        let dim = 1usize << r;
        // Scatter canonical base-4 entries into the interleaved
        // (row bits | col bits) layout the butterfly operates on.
        let mut buf = vec![ZERO; dim * dim];
        for (idx, &v) in self.r.iter().enumerate() {
            let mut row = 0usize;
            let mut col = 0usize;
            for q in 1..=r {
                let mu = (idx >> (2 * (r - q))) & 3;
                row |= (mu >> 1) << (r - q);
                col |= (mu & 1) << (r - q);
            }
            buf[row * dim + col] = Complex64::new(v, 0.0);
        }
        // Inverse of the contraction in `BlochTensor::from_state`,
        // including the 1/2 per qubit that yields the overall 2^-r.
        for q in 1..=r {
            let sr = (1usize << (r - q)) * dim;
            let sc = 1usize << (r - q);
            let mut i = 0usize;
            while i < dim * dim {
                if i & sr == 0 && i & sc == 0 {
                    let t0 = buf[i];
                    let t1 = buf[i + sc];
                    let t2 = buf[i + sr];
                    let t3 = buf[i + sr + sc];
                    let im = Complex64::new(0.0, 1.0);
                    buf[i] = (t0 + t3) * 0.5;
                    buf[i + sc] = (t1 - im * t2) * 0.5;
                    buf[i + sr] = (t1 + im * t2) * 0.5;
                    buf[i + sr + sc] = (t0 - t3) * 0.5;
                }
                i += 1;
            }
        }
        // `buf` is indexed by interleaved (component hi, component lo)
        // bits which after the inverse pass are exactly (row, col) bits.
        Rdm::from_parts(self.kept.clone(), dim, buf)
    }
}

/// Convenience free function mirroring `BlochTensor::from_state`.
pub fn bloch_from_state(psi: &StateVector) -> BlochTensor {
    BlochTensor::from_state(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{PauliTerm, Sign};
    use crate::state::{make_target, partial_trace, TargetSpec};

    #[test]
    fn zero_state_tensor_pattern() {
        // |0..0>: R_S = 1 exactly when every component is I or z.
        let psi = StateVector::zero_state(3);
        let t = BlochTensor::from_state(&psi);
        for idx in 0..t.len() {
            let all_iz = (1..=3).all(|q| matches!(t.component_at(idx, q), 0 | 3));
            let want = if all_iz { 1.0 } else { 0.0 };
            assert!(
                (t.get(idx) - want).abs() < 1e-13,
                "idx {idx}: got {}, want {want}",
                t.get(idx)
            );
        }
        assert!((t.purity() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn bell_tensor_entries() {
        let bell = make_target(2, &TargetSpec::Bell { xi: false, eta: Sign::Plus }).unwrap();
        let t = BlochTensor::from_state(&bell);
        assert!((t.get(0) - 1.0).abs() < 1e-14);
        assert!((t.correlator(1, Axis::X, 2, Axis::X) - 1.0).abs() < 1e-14);
        assert!((t.correlator(1, Axis::Y, 2, Axis::Y) + 1.0).abs() < 1e-14);
        assert!((t.correlator(1, Axis::Z, 2, Axis::Z) - 1.0).abs() < 1e-14);
        assert!(t.single(1, Axis::Z).abs() < 1e-14);
        assert!((t.purity() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn butterfly_matches_direct_expectations() {
        let psi = StateVector::from_amplitudes(
            3,
            (0..8)
                .map(|k| Complex64::new(0.1 + 0.07 * k as f64, 0.35 - 0.05 * k as f64))
                .collect(),
        )
        .unwrap();
        let t = BlochTensor::from_state(&psi);
        for idx in 0..t.len() {
            let direct = BlochTensor::expectation_direct(&psi, idx);
            assert!(
                (t.get(idx) - direct).abs() < 1e-12,
                "string {idx}: butterfly {} vs direct {direct}",
                t.get(idx)
            );
        }
    }

    #[test]
    fn rdm_roundtrip_matches_partial_trace() {
        let w = make_target(3, &TargetSpec::W).unwrap();
        let t = BlochTensor::from_state(&w);
        for keep in [vec![1], vec![2], vec![1, 3], vec![2, 3]] {
            let via_bloch = t.rdm_tensor(&keep).unwrap().to_matrix();
            let direct = partial_trace(&w, &keep).unwrap();
            for r in 0..via_bloch.dim() {
                for c in 0..via_bloch.dim() {
                    assert!(
                        (via_bloch.element(r, c) - direct.element(r, c)).norm() < 1e-12,
                        "keep {keep:?} entry ({r},{c})"
                    );
                }
            }
        }
    }

    #[test]
    fn pair_op_update_matches_recomputation() {
        // A non-unitary two-qubit operator applied to state and tensor
        // must stay consistent after exact renormalization.
        let psi = StateVector::from_amplitudes(
            3,
            (0..8)
                .map(|k| Complex64::new(0.3 - 0.04 * k as f64, 0.02 * (k as f64) * (k as f64)))
                .collect(),
        )
        .unwrap();
        let op = PauliOp::new(vec![
            PauliTerm::identity(Complex64::new(1.0, 0.0)),
            PauliTerm::single(Complex64::new(0.0, -0.3), 2, Axis::X),
            PauliTerm::pair(Complex64::new(0.1, -0.05), 2, Axis::Y, 3, Axis::Z),
        ]);
        let mut t = BlochTensor::from_state(&psi);
        let weight = t.apply_pair_op(2, 3, &op).unwrap();
        let raw = op.apply(&psi);
        let norm2 = raw.norm().powi(2);
        assert!((weight - norm2).abs() < 1e-12);
        let updated = raw.normalized().unwrap();
        assert!(t.deviation_from_state(&updated) < 1e-12);
        assert!((t.get(0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn index_surgery() {
        let psi = StateVector::zero_state(4);
        let t = BlochTensor::from_state(&psi);
        let idx = t.with_component(0, 2, 3) + t.place(4) * 1;
        assert_eq!(t.component_at(idx, 2), 3);
        assert_eq!(t.component_at(idx, 4), 1);
        assert_eq!(t.component_at(idx, 1), 0);
        assert_eq!(t.support_size(idx), 2);
        assert_eq!(t.with_component(idx, 2, 0), t.place(4));
    }

    #[test]
    fn ghz_tensor_signs() {
        let ghz = make_target(3, &TargetSpec::Ghz).unwrap();
        let t = BlochTensor::from_state(&ghz);
        let xxx = t.place(1) + t.place(2) + t.place(3);
        assert!((t.get(xxx) - 1.0).abs() < 1e-13);
        let xyy = t.place(1) + 2 * t.place(2) + 2 * t.place(3);
        assert!((t.get(xyy) + 1.0).abs() < 1e-13);
        assert!((t.correlator(1, Axis::Z, 3, Axis::Z) - 1.0).abs() < 1e-13);
        assert!(t.single(2, Axis::Z).abs() < 1e-13);
    }
}
