//! Independent slow-path references for validation.
//!
//! These functions recompute protocol quantities from first principles on the
//! joint system-plus-detector Hilbert space: the exact entanglement-swapping
//! step (no weak-coupling expansion), an exhaustive outcome enumeration of the
//! expected cost change, and a single-detector variant used to demonstrate why
//! Bell measurements of detector *pairs* are required.

use crate::bloch::bloch_from_state;
use crate::cost::{total_cost, CostWeights};
use crate::dynamics::{MeasurementOutcome, PairConfig};
use crate::pauli::{Axis, Sign};
use crate::state::StateVector;
use crate::{Result, SteerError};
use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);
const BRANCH_TOL: f64 = 1e-14;

/// One Bell-measurement outcome of the exact joint step.
#[derive(Debug, Clone)]
pub struct ExactBranch {
    pub outcome: MeasurementOutcome,
    /// Exact outcome probability (all four sum to one).
    pub probability: f64,
    /// Normalized conditioned system state; `None` for vanishing branches.
    pub state: Option<StateVector>,
}

/// Applies a Pauli at one bit position of a dense amplitude vector.
fn apply_site_pauli(amps: &[Complex64], bit: usize, axis: Axis) -> Vec<Complex64> {
    let mask = 1usize << bit;
    let mut out = vec![ZERO; amps.len()];
    match axis {
        Axis::X => {
            for (i, a) in amps.iter().enumerate() {
                out[i ^ mask] = *a;
            }
        }
        Axis::Y => {
            for (i, a) in amps.iter().enumerate() {
                let phase = if i & mask == 0 { I } else { -I };
                out[i ^ mask] = phase * a;
            }
        }
        Axis::Z => {
            for (i, a) in amps.iter().enumerate() {
                out[i] = if i & mask == 0 { *a } else { -a };
            }
        }
    }
    out
}

/// Applies one steering-link factor `cos(Jδt) − i·s·sin(Jδt)·σ⊗τ` exactly
/// (each link squares to the identity, so the exponential closes).
fn apply_link_factor(
    joint: &mut [Complex64],
    sys_bit: usize,
    sys_axis: Axis,
    det_bit: usize,
    det_axis: Axis,
    sign: f64,
    j_dt: f64,
) {
    let rotated = apply_site_pauli(&apply_site_pauli(joint, sys_bit, sys_axis), det_bit, det_axis);
    let (c, s) = (j_dt.cos(), j_dt.sin());
    for (slot, r) in joint.iter_mut().zip(rotated) {
        *slot = c * *slot - I * sign * s * r;
    }
}

/// Builds the pre-measurement joint state: system ⊗ detectors in `|00⟩_d`,
/// evolved exactly under both steering links for one time step.
pub fn joint_premeasurement_state(
    psi: &StateVector,
    pc: &PairConfig,
    q1: usize,
    q2: usize,
) -> StateVector {
    let n = psi.n_qubits();
    assert!(q1 >= 1 && q1 <= n && q2 >= 1 && q2 <= n && q1 != q2);
    let mut joint = vec![ZERO; 1 << (n + 2)];
    for (s, a) in psi.amplitudes().iter().enumerate() {
        joint[s << 2] = *a;
    }
    // Joint bit layout: system qubit q at bit (n−q)+2, detectors at bits 1, 0.
    apply_link_factor(
        &mut joint,
        (n - q1) + 2,
        pc.first.sys_axis,
        1,
        pc.first.det_axis,
        pc.first.sign.value(),
        pc.j1 * pc.dt,
    );
    apply_link_factor(
        &mut joint,
        (n - q2) + 2,
        pc.second.sys_axis,
        0,
        pc.second.det_axis,
        pc.second.sign.value(),
        pc.j2 * pc.dt,
    );
    StateVector::from_raw(n + 2, joint)
}

/// Exact protocol step: joint unitary evolution followed by a projective
/// Bell measurement of the detector pair.  Returns all four branches in
/// [`MeasurementOutcome::ALL`] order with exact probabilities (summing to one
/// within 1e-12) and normalized conditioned system states.
pub fn exact_pair_step(
    psi: &StateVector,
    pc: &PairConfig,
    q1: usize,
    q2: usize,
) -> Vec<ExactBranch> {
    let n = psi.n_qubits();
    let joint = joint_premeasurement_state(psi, pc, q1, q2);
    let amps = joint.amplitudes();
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut branches = Vec::with_capacity(4);
    for outcome in MeasurementOutcome::ALL {
        // Even-parity Bell states pair detector basis (00, 11); odd (01, 10).
        let (lo, hi) = if outcome.jump { (1, 2) } else { (0, 3) };
        let eta = outcome.eta.value();
        let mut sys = Vec::with_capacity(1 << n);
        let mut norm2 = 0.0;
        for s in 0..1usize << n {
            let a = (amps[(s << 2) | lo] + eta * amps[(s << 2) | hi]) * inv_sqrt2;
            norm2 += a.norm_sqr();
            sys.push(a);
        }
        let state = if norm2 >= BRANCH_TOL {
            let scale = 1.0 / norm2.sqrt();
            Some(StateVector::from_raw(
                n,
                sys.into_iter().map(|a| a * scale).collect(),
            ))
        } else {
            None
        };
        branches.push(ExactBranch {
            outcome,
            probability: norm2,
            state,
        });
    }
    debug_assert!(
        (branches.iter().map(|b| b.probability).sum::<f64>() - 1.0).abs() < 1e-12,
        "exact branch probabilities must sum to one"
    );
    branches
}

/// Exhaustive-outcome reference for the expected total-cost change: sums
/// `P_{ξ,η}·[C(after) − C(before)]` over the four first-order branches.
pub fn brute_force_expected_dc(
    psi: &StateVector,
    target: &StateVector,
    pc: &PairConfig,
    q1: usize,
    q2: usize,
    weights: &CostWeights,
) -> f64 {
    let t = bloch_from_state(psi);
    let tf = bloch_from_state(target);
    let before = total_cost(&t, &tf, weights);
    let probs = pc
        .outcome_probabilities(&t, q1, q2)
        .expect("valid first-order probabilities");
    let mut acc = 0.0;
    for outcome in MeasurementOutcome::ALL {
        let p = probs[outcome.index()];
        if p < BRANCH_TOL {
            continue;
        }
        match pc.sse_step(psi, q1, q2, outcome) {
            Ok(after) => {
                let ta = bloch_from_state(&after);
                acc += p * (total_cost(&ta, &tf, weights) - before);
            }
            Err(SteerError::ZeroProbabilityBranch) => {}
            Err(e) => panic!("unexpected branch failure: {e}"),
        }
    }
    acc
}

/// Parameters of the single-detector comparison protocol: one detector qubit
/// coupled to two system qubits via `H = J[cosθ σ₁^{α₁}τ^z + sinθ σ₂^{α₂}τ^x]`,
/// detector initialized as `cos(η)|0⟩ + e^{iφ} sin(η)|1⟩` and measured in the
/// rotated basis with angles `(η̃, φ̃)`.
#[derive(Debug, Clone, Copy)]
pub struct SingleDetectorParams {
    pub theta: f64,
    pub init_tilt: f64,
    pub init_phase: f64,
    pub meas_tilt: f64,
    pub meas_phase: f64,
    pub alpha1: Axis,
    pub alpha2: Axis,
    pub j: f64,
    pub dt: f64,
}

impl SingleDetectorParams {
    /// The aligned family `φ = φ̃ = 0`, `η̃ = −η`, for which each outcome
    /// branch reduces to a rotation of a single qubit.
    pub fn aligned(theta: f64, tilt: f64, alpha1: Axis, alpha2: Axis, j: f64, dt: f64) -> Self {
        Self {
            theta,
            init_tilt: tilt,
            init_phase: 0.0,
            meas_tilt: -tilt,
            meas_phase: 0.0,
            alpha1,
            alpha2,
            j,
            dt,
        }
    }
}

/// One outcome branch of the single-detector step.
#[derive(Debug, Clone)]
pub struct DetectorBranch {
    pub probability: f64,
    pub state: Option<StateVector>,
}

/// Exact 8-dimensional evolution and projective readout of the
/// single-detector protocol.  Returns the `ξ = +` and `ξ = −` branches.
pub fn single_detector_branches(
    psi: &StateVector,
    params: &SingleDetectorParams,
) -> [DetectorBranch; 2] {
    assert_eq!(psi.n_qubits(), 2, "single-detector protocol steers one qubit pair");
    let mut joint = vec![ZERO; 8];
    let ci = Complex64::from_polar(params.init_tilt.sin(), params.init_phase);
    for (s, a) in psi.amplitudes().iter().enumerate() {
        joint[s << 1] = params.init_tilt.cos() * a;
        joint[(s << 1) | 1] = ci * a;
    }
    // H² = J²·1 because the two terms anticommute on the detector.
    let rot_z = apply_site_pauli(&apply_site_pauli(&joint, 2, params.alpha1), 0, Axis::Z);
    let rot_x = apply_site_pauli(&apply_site_pauli(&joint, 1, params.alpha2), 0, Axis::X);
    let (c, s) = ((params.j * params.dt).cos(), (params.j * params.dt).sin());
    let (ct, st) = (params.theta.cos(), params.theta.sin());
    for i in 0..8 {
        joint[i] = c * joint[i] - I * s * (ct * rot_z[i] + st * rot_x[i]);
    }
    // Measurement-basis bras for ξ = ±.
    let mp = Complex64::from_polar(params.meas_tilt.sin(), -params.meas_phase);
    let mm = Complex64::from_polar(params.meas_tilt.cos(), params.meas_phase);
    let bras = [
        [Complex64::new(params.meas_tilt.cos(), 0.0), mp],
        [Complex64::new(params.meas_tilt.sin(), 0.0), -mm],
    ];
    bras.map(|bra| {
        let mut sys = Vec::with_capacity(4);
        let mut norm2 = 0.0;
        for s_idx in 0..4usize {
            let a = bra[0] * joint[s_idx << 1] + bra[1] * joint[(s_idx << 1) | 1];
            norm2 += a.norm_sqr();
            sys.push(a);
        }
        let state = if norm2 >= BRANCH_TOL {
            let scale = 1.0 / norm2.sqrt();
            Some(StateVector::from_raw(
                2,
                sys.into_iter().map(|a| a * scale).collect(),
            ))
        } else {
            None
        };
        DetectorBranch {
            probability: norm2,
            state,
        }
    })
}

/// Conditioned state of the single-detector step for outcome `ξ`.
pub fn single_detector_step(
    psi: &StateVector,
    params: &SingleDetectorParams,
    xi: Sign,
) -> Result<StateVector> {
    let branches = single_detector_branches(psi, params);
    let k = if xi == Sign::Plus { 0 } else { 1 };
    branches[k]
        .state
        .clone()
        .ok_or(SteerError::ZeroProbabilityBranch)
}

/// Least-squares residual of the output against the span of
/// `{|Ψ⟩, σ₁^{α₁}|Ψ⟩, σ₂^{α₂}|Ψ⟩}` — the three-operator form every
/// single-detector branch must take.
pub fn single_detector_form_residual(
    input: &StateVector,
    output: &StateVector,
    alpha1: Axis,
    alpha2: Axis,
) -> f64 {
    let basis = [
        input.clone(),
        input.apply_pauli(1, alpha1),
        input.apply_pauli(2, alpha2),
    ];
    // Gram matrix projection residual via modified Gram-Schmidt.
    let mut ortho: Vec<StateVector> = Vec::new();
    let mut residual: Vec<Complex64> = output.amplitudes().to_vec();
    for b in basis {
        let mut v: Vec<Complex64> = b.amplitudes().to_vec();
        for o in &ortho {
            let c = o.inner(&StateVector::from_raw(2, v.clone()));
            for (vi, oi) in v.iter_mut().zip(o.amplitudes()) {
                *vi -= c * oi;
            }
        }
        let n2: f64 = v.iter().map(|a| a.norm_sqr()).sum();
        if n2 > 1e-24 {
            let scale = 1.0 / n2.sqrt();
            let unit = StateVector::from_raw(2, v.into_iter().map(|a| a * scale).collect());
            let c = unit.inner(&StateVector::from_raw(2, residual.clone()));
            for (ri, ui) in residual.iter_mut().zip(unit.amplitudes()) {
                *ri -= c * ui;
            }
            ortho.push(unit);
        }
    }
    residual.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// Magnitude of the two-qubit Schmidt-coefficient product: zero exactly for
/// product states, positive for entangled ones.
pub fn schmidt_product(psi: &StateVector) -> f64 {
    assert_eq!(psi.n_qubits(), 2);
    let a = psi.amplitudes();
    (a[0] * a[3] - a[1] * a[2]).norm()
}
