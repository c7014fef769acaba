//! Cost functions and expected cost changes used for steering decisions.
//!
//! The distance to the target is measured by a weighted sum of local
//! infidelities: `C = Σ_r p_r C_r`, where `C_r` averages squared Bloch-tensor
//! deviations over all r-qubit subsets and `C_N = 1 − F²` is the global
//! infidelity.  Steering decisions minimize the expected single-step change
//! `E[dC]`, assembled from the average drift `dR̄_S`, the outcome-conditioned
//! jump updates, and the second-moment (variance) contribution per Pauli
//! string.

use crate::bloch::BlochTensor;
use crate::dynamics::{MeasurementOutcome, PairConfig, SteeringConfig};
use crate::pauli::{epsilon, third_axis, Axis, Sign};
use crate::state::StateVector;
use crate::{Result, SteerError};
use num_complex::Complex64;

/// Denominators smaller than this are treated as exactly vanishing branches.
const BRANCH_TOL: f64 = 1e-14;
/// Closed-form ratio denominators below this trigger the guarded generic path.
const DEGENERATE_TOL: f64 = 1e-12;
/// Overlaps below this count as an orthogonal target for weak values.
const OVERLAP_TOL: f64 = 1e-12;

/// Subset-rank weights `p_r` for the total cost `C = Σ_r p_r C_r`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostWeights {
    p: Vec<f64>,
}

impl CostWeights {
    /// Validates weights: `p_r ≥ 0`, `Σ_r p_r = 1` within 1e-12.
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(SteerError::InvalidParameter("empty weight vector".into()));
        }
        if let Some(w) = p.iter().find(|w| **w < 0.0 || !w.is_finite()) {
            return Err(SteerError::InvalidParameter(format!(
                "weight {w} out of range"
            )));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(SteerError::InvalidParameter(format!(
                "weights sum to {sum}, expected 1"
            )));
        }
        Ok(Self { p })
    }

    /// Default weight ladder: `p_1 = 0.9`, `p_{r+1} = 0.1 p_r`, with the last
    /// rank absorbing the remainder so the weights sum to one.
    pub fn default_for(n_qubits: usize) -> Self {
        Self::ladder(n_qubits, 0.9)
    }

    /// Geometric ladder `p_{r+1} = 0.1·p_r` from the given `p1`, with the
    /// top rank absorbing the remainder so the weights sum to one.
    pub fn ladder(n_qubits: usize, p1: f64) -> Self {
        assert!(n_qubits >= 1);
        assert!((0.0..=1.0).contains(&p1), "p1 must lie in [0, 1]");
        if n_qubits == 1 {
            return Self { p: vec![1.0] };
        }
        let mut p = vec![0.0; n_qubits];
        let mut w = p1;
        let mut used = 0.0;
        for slot in p.iter_mut().take(n_qubits - 1) {
            *slot = w;
            used += w;
            w *= 0.1;
        }
        let rest = 1.0 - used;
        assert!(
            rest >= -1e-12,
            "ladder from p1={p1} exceeds the unit sum over {n_qubits} ranks"
        );
        p[n_qubits - 1] = rest.max(0.0);
        Self { p }
    }

    /// All weight on the global rank: `p = (0, …, 0, 1)`.
    pub fn global_only(n_qubits: usize) -> Self {
        assert!(n_qubits >= 1);
        let mut p = vec![0.0; n_qubits];
        p[n_qubits - 1] = 1.0;
        Self { p }
    }

    /// Number of ranks (equals the qubit count it was built for).
    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Weight of rank `r` (1-based).
    pub fn rank_weight(&self, r: usize) -> f64 {
        self.p[r - 1]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    /// Per-support-size weights `w(t)` collapsing the rank sum: summing
    /// `w(|S|)·x_S` over all strings equals `Σ_r p_r (2^r C(N,r))^{-1}
    /// Σ_{|M|=r} Σ_{supp(S)⊆M} x_S`, since a string of support `t` lies in
    /// `C(N−t, r−t)` subsets of size `r`.
    pub fn support_weights(&self, n_qubits: usize) -> Vec<f64> {
        let nr = self.p.len();
        assert_eq!(nr, n_qubits, "weights built for a different qubit count");
        let mut w = vec![0.0; n_qubits + 1];
        for (t, slot) in w.iter_mut().enumerate() {
            let mut acc = 0.0;
            for r in t.max(1)..=n_qubits {
                acc += self.p[r - 1] * binomial(n_qubits - t, r - t)
                    / ((1u64 << r) as f64 * binomial(n_qubits, r));
            }
            *slot = acc;
        }
        w
    }
}

/// Binomial coefficient as f64 (small arguments only).
fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Global infidelity `C_N = 1 − F² = 1 − 2^{−N} Σ_S R_S R^f_S`.
pub fn global_cost(t: &BlochTensor, target: &BlochTensor) -> f64 {
    let n = t.n_qubits();
    assert_eq!(n, target.n_qubits());
    let dot: f64 = t
        .coeffs()
        .iter()
        .zip(target.coeffs())
        .map(|(a, b)| a * b)
        .sum();
    1.0 - dot / (1u64 << n) as f64
}

/// Rank-`r` local cost: squared Bloch deviations averaged over all
/// `r`-qubit subsets, `C_r = (2^{r+1} C(N,r))^{-1} Σ_S C(N−|S|, r−|S|) (ΔR_S)²`.
pub fn local_cost(t: &BlochTensor, target: &BlochTensor, r: usize) -> f64 {
    let n = t.n_qubits();
    assert_eq!(n, target.n_qubits());
    assert!(r >= 1 && r <= n, "rank out of range");
    let mut acc = 0.0;
    for idx in 0..t.len() {
        let supp = t.support_size(idx);
        if supp > r {
            continue;
        }
        let d = t.get(idx) - target.get(idx);
        acc += binomial(n - supp, r - supp) * d * d;
    }
    acc / ((1u64 << (r + 1)) as f64 * binomial(n, r))
}

/// Total cost `C = Σ_r p_r C_r`, evaluated in a single pass via support weights.
pub fn total_cost(t: &BlochTensor, target: &BlochTensor, weights: &CostWeights) -> f64 {
    let w = weights.support_weights(t.n_qubits());
    let mut acc = 0.0;
    for idx in 0..t.len() {
        let d = t.get(idx) - target.get(idx);
        acc += w[t.support_size(idx)] * d * d;
    }
    0.5 * acc
}

/// Replaces component 0 ↔ a at qubit `q` (identity block swap), leaving other
/// components alone.
fn swap_identity(t: &BlochTensor, idx: usize, q: usize, a: usize) -> usize {
    let mu = t.component_at(idx, q);
    if mu == 0 {
        t.with_component(idx, q, a)
    } else if mu == a {
        t.with_component(idx, q, 0)
    } else {
        idx
    }
}

/// Symmetric cross tensor entry `F_S` for steered slots `(q1, a1)`, `(q2, a2)`:
/// expectation of the symmetrized two-sided Pauli insertion
/// `½⟨σ_{q1}^{a1} σ_S σ_{q2}^{a2} + σ_{q2}^{a2} σ_S σ_{q1}^{a1}⟩`.
/// `flip_anticommuting` selects the anticommutator variant `H_S`, which
/// differs only by the sign of the both-slots-anticommuting block.
fn cross_entry(
    t: &BlochTensor,
    idx: usize,
    q1: usize,
    a1: usize,
    q2: usize,
    a2: usize,
    flip_anticommuting: bool,
) -> f64 {
    let mu1 = t.component_at(idx, q1);
    let mu2 = t.component_at(idx, q2);
    let ac1 = mu1 != 0 && mu1 != a1;
    let ac2 = mu2 != 0 && mu2 != a2;
    match (ac1, ac2) {
        (false, false) => {
            let j = swap_identity(t, idx, q1, a1);
            t.get(swap_identity(t, j, q2, a2))
        }
        (true, true) => {
            let c1 = third_axis(a1, mu1).expect("anticommuting pair");
            let c2 = third_axis(a2, mu2).expect("anticommuting pair");
            let sign = epsilon(a1, mu1, c1) * epsilon(a2, mu2, c2);
            let j = t.with_component(t.with_component(idx, q1, c1), q2, c2);
            let v = sign * t.get(j);
            if flip_anticommuting {
                -v
            } else {
                v
            }
        }
        _ => 0.0,
    }
}

/// Antisymmetric cross tensor entry `F̃_S`: expectation of
/// `(i/2)⟨σ_{q1}^{a1} σ_S σ_{q2}^{a2} − σ_{q2}^{a2} σ_S σ_{q1}^{a1}⟩`,
/// nonzero only when exactly one steered slot anticommutes.
fn skew_cross_entry(t: &BlochTensor, idx: usize, q1: usize, a1: usize, q2: usize, a2: usize) -> f64 {
    let mu1 = t.component_at(idx, q1);
    let mu2 = t.component_at(idx, q2);
    let ac1 = mu1 != 0 && mu1 != a1;
    let ac2 = mu2 != 0 && mu2 != a2;
    match (ac1, ac2) {
        (true, false) => {
            let c1 = third_axis(a1, mu1).expect("anticommuting pair");
            let j = swap_identity(t, t.with_component(idx, q1, c1), q2, a2);
            -epsilon(a1, mu1, c1) * t.get(j)
        }
        (false, true) => {
            let c2 = third_axis(a2, mu2).expect("anticommuting pair");
            let j = t.with_component(swap_identity(t, idx, q1, a1), q2, c2);
            epsilon(a2, mu2, c2) * t.get(j)
        }
        _ => 0.0,
    }
}

/// Detector-axis structure of a pair config, fixing which variance terms arise.
#[derive(Debug, Clone, Copy, PartialEq)]
enum VarCase {
    /// Both links longitudinal: no jumps at all.
    DarkPair,
    /// Only the first link is transverse.
    SingleFirst,
    /// Only the second link is transverse.
    SingleSecond,
    /// Both transverse on the same detector axis: interference via `F_S` and
    /// an outcome-dependent normalization `Γ₁+Γ₂ ± 2√(Γ₁Γ₂) Q`.
    SymmetricCross,
    /// Both transverse on different axes: skew interference via `F̃_S` with
    /// sign `ζ`, constant normalization `Γ₁+Γ₂`.
    SkewCross(f64),
}

fn classify(pc: &PairConfig) -> VarCase {
    let b1 = pc.first.det_axis;
    let b2 = pc.second.det_axis;
    match (b1, b2) {
        (Axis::Z, Axis::Z) => VarCase::DarkPair,
        (_, Axis::Z) => VarCase::SingleFirst,
        (Axis::Z, _) => VarCase::SingleSecond,
        (a, b) if a == b => VarCase::SymmetricCross,
        (Axis::X, Axis::Y) => VarCase::SkewCross(1.0),
        _ => VarCase::SkewCross(-1.0),
    }
}

/// Half the expected squared update, `½ E[(dR_S)²]`, per string.
///
/// Only jump branches contribute at first order: with jump update
/// `dR_S = 2G_S^{(η)}/⟨c_η†c_η⟩` and branch probability `½ δt ⟨c_η†c_η⟩`,
/// the sum is `δt Σ_η (G_S^{(η)})² / ⟨c_η†c_η⟩`.  Vanishing branch
/// normalizations (`< 1e-14`) contribute 0 — the numerator vanishes too.
pub fn half_var_dr(t: &BlochTensor, pc: &PairConfig, q1: usize, q2: usize) -> Vec<f64> {
    let len = t.len();
    let mut out = vec![0.0; len];
    let dt = pc.dt;
    let (g1, g2) = (pc.gamma1(), pc.gamma2());
    let a1 = pc.first.sys_axis.index();
    let a2 = pc.second.sys_axis.index();
    let case = classify(pc);
    match case {
        VarCase::DarkPair => {}
        VarCase::SingleFirst | VarCase::SingleSecond => {
            let (q, a, g) = if case == VarCase::SingleFirst {
                (q1, a1, g1)
            } else {
                (q2, a2, g2)
            };
            for (idx, slot) in out.iter_mut().enumerate() {
                let mu = t.component_at(idx, q);
                if mu != 0 && mu != a {
                    let r = t.get(idx);
                    *slot = 2.0 * dt * g * r * r;
                }
            }
        }
        VarCase::SymmetricCross => {
            let lam = (g1 * g2).sqrt();
            let q_corr = t.correlator(q1, pc.first.sys_axis, q2, pc.second.sys_axis);
            let cdc = [g1 + g2 + 2.0 * lam * q_corr, g1 + g2 - 2.0 * lam * q_corr];
            for (idx, slot) in out.iter_mut().enumerate() {
                let r = t.get(idx);
                let mu1 = t.component_at(idx, q1);
                let mu2 = t.component_at(idx, q2);
                let d = decay_rate(mu1, a1, g1, mu2, a2, g2) * r;
                let v = lam * (cross_entry(t, idx, q1, a1, q2, a2, false) - q_corr * r);
                let mut acc = 0.0;
                for (k, c) in cdc.iter().enumerate() {
                    if *c >= BRANCH_TOL {
                        let eta = if k == 0 { 1.0 } else { -1.0 };
                        let g = -d + eta * v;
                        acc += g * g / c;
                    }
                }
                *slot = dt * acc;
            }
        }
        VarCase::SkewCross(_) => {
            let lam2 = g1 * g2;
            let norm = g1 + g2;
            for (idx, slot) in out.iter_mut().enumerate() {
                let r = t.get(idx);
                let mu1 = t.component_at(idx, q1);
                let mu2 = t.component_at(idx, q2);
                let d = decay_rate(mu1, a1, g1, mu2, a2, g2) * r;
                let ft = skew_cross_entry(t, idx, q1, a1, q2, a2);
                *slot = 2.0 * dt * (d * d + lam2 * ft * ft) / norm;
            }
        }
    }
    out
}

/// Combined transverse decay rate hitting a string: `Γ₁[μ₁ ⊥ a₁] + Γ₂[μ₂ ⊥ a₂]`.
fn decay_rate(mu1: usize, a1: usize, g1: f64, mu2: usize, a2: usize, g2: f64) -> f64 {
    let mut d = 0.0;
    if mu1 != 0 && mu1 != a1 {
        d += g1;
    }
    if mu2 != 0 && mu2 != a2 {
        d += g2;
    }
    d
}

/// Outcome-conditioned Bloch update `dR_S` for one steered pair.
///
/// The jump branch (`ξ=1`) is exact: `dR_S = 2G_S^{(η)}/⟨c_η†c_η⟩`.  The
/// no-jump branch is first order in `δt`: longitudinal rotations, plus for
/// same-axis transverse pairs the correlated diffusion
/// `−2δtη√(Γ₁Γ₂)(H_S − Q R_S)`, plus for mixed-axis transverse pairs the
/// exchange-term rotation generated by `√(Γ₁Γ₂) σ^{a1} σ^{a2}`.
pub fn conditioned_dr(
    t: &BlochTensor,
    pc: &PairConfig,
    q1: usize,
    q2: usize,
    outcome: MeasurementOutcome,
) -> Result<Vec<f64>> {
    let len = t.len();
    let dt = pc.dt;
    let eta = outcome.eta.value();
    let (g1, g2) = (pc.gamma1(), pc.gamma2());
    let lam = (g1 * g2).sqrt();
    let a1 = pc.first.sys_axis.index();
    let a2 = pc.second.sys_axis.index();
    let case = classify(pc);
    let mut out = vec![0.0; len];

    if outcome.jump {
        let cdc = pc.expectation_cdc(t, q1, q2, outcome.eta);
        if cdc < BRANCH_TOL {
            return Err(SteerError::ZeroProbabilityBranch);
        }
        let q_corr = match case {
            VarCase::SymmetricCross => {
                t.correlator(q1, pc.first.sys_axis, q2, pc.second.sys_axis)
            }
            _ => 0.0,
        };
        for (idx, slot) in out.iter_mut().enumerate() {
            let r = t.get(idx);
            let mu1 = t.component_at(idx, q1);
            let mu2 = t.component_at(idx, q2);
            let d = match case {
                VarCase::SingleFirst => decay_rate(mu1, a1, g1, 0, 1, 0.0) * r,
                VarCase::SingleSecond => decay_rate(0, 1, 0.0, mu2, a2, g2) * r,
                _ => decay_rate(mu1, a1, g1, mu2, a2, g2) * r,
            };
            let cross = match case {
                VarCase::SymmetricCross => {
                    lam * (cross_entry(t, idx, q1, a1, q2, a2, false) - q_corr * r)
                }
                VarCase::SkewCross(zeta) => {
                    zeta * lam * skew_cross_entry(t, idx, q1, a1, q2, a2)
                }
                _ => 0.0,
            };
            *slot = 2.0 * (-d + eta * cross) / cdc;
        }
        return Ok(out);
    }

    // No-jump branch, first order in δt.
    let q_corr = match case {
        VarCase::SymmetricCross => t.correlator(q1, pc.first.sys_axis, q2, pc.second.sys_axis),
        _ => 0.0,
    };
    for (idx, slot) in out.iter_mut().enumerate() {
        let mut d = 0.0;
        for (cfg, q) in [(pc.first, q1), (pc.second, q2)] {
            if cfg.det_axis != Axis::Z {
                continue;
            }
            let a = cfg.sys_axis.index();
            let mu = t.component_at(idx, q);
            if mu != 0 && mu != a {
                let c = third_axis(a, mu).expect("anticommuting pair");
                let j = pc_coupling(cfg.sign, if q == q1 { pc.j1 } else { pc.j2 });
                d += -2.0 * dt * j * epsilon(a, mu, c) * t.get(t.with_component(idx, q, c));
            }
        }
        match case {
            VarCase::SymmetricCross => {
                // Cross term carries the sector's no-jump Bell label, which
                // is flipped for two detector-y couplings.
                let nj_eta = pc.no_jump_cross_eta(outcome.eta).value();
                let h = cross_entry(t, idx, q1, a1, q2, a2, true);
                d += -2.0 * dt * nj_eta * lam * (h - q_corr * t.get(idx));
            }
            VarCase::SkewCross(_) => {
                // Exchange Hamiltonian term, same sign for both axis orders.
                let mu1 = t.component_at(idx, q1);
                let mu2 = t.component_at(idx, q2);
                let ac1 = mu1 != 0 && mu1 != a1;
                let ac2 = mu2 != 0 && mu2 != a2;
                if ac1 && !ac2 {
                    let c1 = third_axis(a1, mu1).expect("anticommuting pair");
                    let j = swap_identity(t, t.with_component(idx, q1, c1), q2, a2);
                    d += -2.0 * dt * eta * lam * epsilon(a1, mu1, c1) * t.get(j);
                } else if ac2 && !ac1 {
                    let c2 = third_axis(a2, mu2).expect("anticommuting pair");
                    let j = t.with_component(swap_identity(t, idx, q1, a1), q2, c2);
                    d += -2.0 * dt * eta * lam * epsilon(a2, mu2, c2) * t.get(j);
                }
            }
            _ => {}
        }
        *slot = d;
    }
    Ok(out)
}

/// Signed coupling `s·J` for a longitudinal link.
fn pc_coupling(sign: Sign, j: f64) -> f64 {
    sign.value() * j
}

/// Expected change of the rank-`r` local cost for one steered pair:
/// `(2^r C(N,r))^{-1} Σ_S C(N−|S|, r−|S|) [ΔR_S dR̄_S + ½E[(dR_S)²]]`.
pub fn expected_dc_rank(
    t: &BlochTensor,
    target: &BlochTensor,
    pc: &PairConfig,
    q1: usize,
    q2: usize,
    r: usize,
) -> f64 {
    let n = t.n_qubits();
    assert!(r >= 1 && r <= n);
    let avg = pc.lindblad_avg_dr(t, q1, q2);
    let var = half_var_dr(t, pc, q1, q2);
    let mut acc = 0.0;
    for idx in 0..t.len() {
        let supp = t.support_size(idx);
        if supp > r {
            continue;
        }
        let d = t.get(idx) - target.get(idx);
        acc += binomial(n - supp, r - supp) * (d * avg[idx] + var[idx]);
    }
    acc / ((1u64 << r) as f64 * binomial(n, r))
}

/// Expected total-cost change `E[dC] = Σ_r p_r E[dC_r]`, single pass via
/// support weights.  Reference path for the batched [`GainScan`].
pub fn expected_dc(
    t: &BlochTensor,
    target: &BlochTensor,
    pc: &PairConfig,
    q1: usize,
    q2: usize,
    weights: &CostWeights,
) -> f64 {
    let w = weights.support_weights(t.n_qubits());
    let avg = pc.lindblad_avg_dr(t, q1, q2);
    let var = half_var_dr(t, pc, q1, q2);
    let mut acc = 0.0;
    for idx in 0..t.len() {
        let d = t.get(idx) - target.get(idx);
        acc += w[t.support_size(idx)] * (d * avg[idx] + var[idx]);
    }
    acc
}

/// Batched expected-gain evaluator for one steered pair.
///
/// Precomputes string reductions once per (state, pair), then assembles
/// `E[dC]` for any steering config in O(1).  Agrees with [`expected_dc`]
/// exactly by construction of the same per-string terms.
pub struct GainScan {
    dt: f64,
    j1: f64,
    j2: f64,
    g1: f64,
    g2: f64,
    /// Rotation reductions per slot and steering axis:
    /// `Σ_{μ ⊥ a} w ΔR ε(a,μ,c) R_{S(μ→c)}`.
    rot: [[f64; 3]; 2],
    /// Decay reductions `Σ_{μ ⊥ a} w ΔR R`.
    dec: [[f64; 3]; 2],
    /// Single-link variance reductions `Σ_{μ ⊥ a} w R²`.
    vone: [[f64; 3]; 2],
    /// Same-axis cross variance totals per system-axis pair.
    vsym: [[f64; 3]; 3],
    /// Mixed-axis cross variance totals per system-axis pair.
    vmix: [[f64; 3]; 3],
}

impl GainScan {
    pub fn new(
        t: &BlochTensor,
        target: &BlochTensor,
        weights: &CostWeights,
        q1: usize,
        q2: usize,
        j1: f64,
        j2: f64,
        dt: f64,
    ) -> Self {
        let n = t.n_qubits();
        let w_supp = weights.support_weights(n);
        let len = t.len();
        let mut w = vec![0.0; len];
        let mut delta = vec![0.0; len];
        for idx in 0..len {
            w[idx] = w_supp[t.support_size(idx)];
            delta[idx] = t.get(idx) - target.get(idx);
        }
        let (g1, g2) = (j1 * j1 * dt, j2 * j2 * dt);
        let lam = (g1 * g2).sqrt();

        let mut rot = [[0.0; 3]; 2];
        let mut dec = [[0.0; 3]; 2];
        let mut vone = [[0.0; 3]; 2];
        for idx in 1..len {
            let r = t.get(idx);
            let wd = w[idx] * delta[idx];
            let wr2 = w[idx] * r * r;
            for (slot, q) in [(0usize, q1), (1usize, q2)] {
                let mu = t.component_at(idx, q);
                if mu == 0 {
                    continue;
                }
                for a in 1..=3usize {
                    if a == mu {
                        continue;
                    }
                    let c = third_axis(a, mu).expect("anticommuting pair");
                    rot[slot][a - 1] += wd * epsilon(a, mu, c) * t.get(t.with_component(idx, q, c));
                    dec[slot][a - 1] += wd * r;
                    vone[slot][a - 1] += wr2;
                }
            }
        }

        let mut vsym = [[0.0; 3]; 3];
        let mut vmix = [[0.0; 3]; 3];
        for a1 in 1..=3usize {
            for a2 in 1..=3usize {
                let q_corr = t.correlator(
                    q1,
                    Axis::from_index(a1).unwrap(),
                    q2,
                    Axis::from_index(a2).unwrap(),
                );
                // Accumulate Σ w D², Σ w D v, Σ w v², Σ w Λ² F̃².
                let (mut uu, mut uv, mut vv, mut xx) = (0.0, 0.0, 0.0, 0.0);
                for idx in 0..len {
                    let r = t.get(idx);
                    let mu1 = t.component_at(idx, q1);
                    let mu2 = t.component_at(idx, q2);
                    let d = decay_rate(mu1, a1, g1, mu2, a2, g2) * r;
                    let v = lam * (cross_entry(t, idx, q1, a1, q2, a2, false) - q_corr * r);
                    let ft = skew_cross_entry(t, idx, q1, a1, q2, a2);
                    uu += w[idx] * d * d;
                    uv += w[idx] * d * v;
                    vv += w[idx] * v * v;
                    xx += w[idx] * lam * lam * ft * ft;
                }
                let cdc_p = g1 + g2 + 2.0 * lam * q_corr;
                let cdc_m = g1 + g2 - 2.0 * lam * q_corr;
                let ip = if cdc_p >= BRANCH_TOL { 1.0 / cdc_p } else { 0.0 };
                let im = if cdc_m >= BRANCH_TOL { 1.0 / cdc_m } else { 0.0 };
                vsym[a1 - 1][a2 - 1] = dt * ((uu + vv) * (ip + im) - 2.0 * uv * (ip - im));
                vmix[a1 - 1][a2 - 1] = 2.0 * dt * (uu + xx) / (g1 + g2);
            }
        }

        Self {
            dt,
            j1,
            j2,
            g1,
            g2,
            rot,
            dec,
            vone,
            vsym,
            vmix,
        }
    }

    /// Builds the scanner from a pair config's couplings (steering axes in
    /// `pc` are ignored; every config of the pair can be queried).
    pub fn from_pair(
        t: &BlochTensor,
        target: &BlochTensor,
        weights: &CostWeights,
        pc: &PairConfig,
        q1: usize,
        q2: usize,
    ) -> Self {
        Self::new(t, target, weights, q1, q2, pc.j1, pc.j2, pc.dt)
    }

    /// Expected total-cost change for one steering config of the pair.
    pub fn gain(&self, first: SteeringConfig, second: SteeringConfig) -> f64 {
        let a1 = first.sys_axis.index() - 1;
        let a2 = second.sys_axis.index() - 1;
        let t1 = first.det_axis != Axis::Z;
        let t2 = second.det_axis != Axis::Z;
        let mut g = 0.0;
        if t1 {
            g += -2.0 * self.dt * self.g1 * self.dec[0][a1];
        } else {
            g += -2.0 * self.dt * first.sign.value() * self.j1 * self.rot[0][a1];
        }
        if t2 {
            g += -2.0 * self.dt * self.g2 * self.dec[1][a2];
        } else {
            g += -2.0 * self.dt * second.sign.value() * self.j2 * self.rot[1][a2];
        }
        match (t1, t2) {
            (true, true) => {
                if first.det_axis == second.det_axis {
                    g += self.vsym[a1][a2];
                } else {
                    g += self.vmix[a1][a2];
                }
            }
            (true, false) => g += 2.0 * self.dt * self.g1 * self.vone[0][a1],
            (false, true) => g += 2.0 * self.dt * self.g2 * self.vone[1][a2],
            (false, false) => {}
        }
        g
    }
}

/// Weak values `W_{m,α} = ⟨Ψ_f|σ_m^α|Ψ⟩ / ⟨Ψ_f|Ψ⟩` for every qubit and axis.
pub fn weak_values(psi: &StateVector, target: &StateVector) -> Result<Vec<[Complex64; 3]>> {
    let n = psi.n_qubits();
    if n != target.n_qubits() {
        return Err(SteerError::Dimension(format!(
            "state has {n} qubits, target {}",
            target.n_qubits()
        )));
    }
    let overlap = target.inner(psi);
    if overlap.norm() <= OVERLAP_TOL {
        return Err(SteerError::OrthogonalTarget);
    }
    let mut out = Vec::with_capacity(n);
    for q in 1..=n {
        let mut row = [Complex64::new(0.0, 0.0); 3];
        for (k, axis) in Axis::ALL.iter().enumerate() {
            row[k] = target.inner(&psi.apply_pauli(q, *axis)) / overlap;
        }
        out.push(row);
    }
    Ok(out)
}

/// Expected global-infidelity change expressed through weak values:
/// `E[dC_N] = (1−C_N) δt Σ_m [−2 s_m J_m δ_{β_m,z} Im W_{m,α_m}
///            + Γ_m δ_{β_m,⊥} (1 − |W_{m,α_m}|²)]`.
/// Orthogonal inputs fall back to the direct matrix-element form
/// `−δt Σ_m Γ_m δ_{β_m,⊥} |⟨Ψ_f|σ_m^{α_m}|Ψ⟩|²`.
pub fn expected_dcn_weak(
    psi: &StateVector,
    target: &StateVector,
    pc: &PairConfig,
    q1: usize,
    q2: usize,
) -> f64 {
    let overlap = target.inner(psi);
    let dt = pc.dt;
    let links = [(pc.first, q1, pc.j1), (pc.second, q2, pc.j2)];
    if overlap.norm() <= OVERLAP_TOL {
        let mut acc = 0.0;
        for (cfg, q, j) in links {
            if cfg.det_axis != Axis::Z {
                let me = target.inner(&psi.apply_pauli(q, cfg.sys_axis));
                acc += -dt * j * j * dt * me.norm_sqr();
            }
        }
        return acc;
    }
    let f2 = overlap.norm_sqr();
    let mut acc = 0.0;
    for (cfg, q, j) in links {
        let w = target.inner(&psi.apply_pauli(q, cfg.sys_axis)) / overlap;
        if cfg.det_axis == Axis::Z {
            acc += -2.0 * cfg.sign.value() * j * w.im;
        } else {
            acc += j * j * dt * (1.0 - w.norm_sqr());
        }
    }
    f2 * dt * acc
}

/// Bloch vector of one qubit as `[x, y, z]`.
fn bloch_vec(t: &BlochTensor, q: usize) -> [f64; 3] {
    [
        t.single(q, Axis::X),
        t.single(q, Axis::Y),
        t.single(q, Axis::Z),
    ]
}

fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Interference numerator of the two-qubit same-axis ratio term:
/// `X = ½(1−Q²)(|R₁|²+|R₂|²) − (R₁^{a1})² − (R₂^{a2})² + 2Q R₁^{a1} R₂^{a2}`
/// with `Q = R_{a1,a2}`.
pub fn n2_x_term(t: &BlochTensor, a1: Axis, a2: Axis) -> f64 {
    assert_eq!(t.n_qubits(), 2);
    let q = t.correlator(1, a1, 2, a2);
    let r1 = bloch_vec(t, 1);
    let r2 = bloch_vec(t, 2);
    let p1 = r1[a1.index() - 1];
    let p2 = r2[a2.index() - 1];
    0.5 * (1.0 - q * q) * (dot3(r1, r1) + dot3(r2, r2)) - p1 * p1 - p2 * p2 + 2.0 * q * p1 * p2
}

/// Closed-form two-qubit expected cost changes `(E[dC₁], E[dC₂])`.
///
/// Valid for detector axes in `{x, z}` only (`Unsupported` otherwise).  The
/// same-axis ratio term's denominator can degenerate (`|Q| → 1` at equal
/// couplings); below 1e-12 the guarded generic path is used instead, which
/// resolves the 0/0 limit branch by branch.
pub fn n2_closed_forms(
    t: &BlochTensor,
    target: &BlochTensor,
    pc: &PairConfig,
) -> Result<(f64, f64)> {
    if t.n_qubits() != 2 || target.n_qubits() != 2 {
        return Err(SteerError::Dimension("closed forms require 2 qubits".into()));
    }
    for cfg in [pc.first, pc.second] {
        if cfg.det_axis == Axis::Y {
            return Err(SteerError::Unsupported(
                "closed forms cover detector axes x and z only".into(),
            ));
        }
    }
    let dt = pc.dt;
    let (g1, g2) = (pc.gamma1(), pc.gamma2());
    let links = [(pc.first, 1usize, pc.j1, g1), (pc.second, 2usize, pc.j2, g2)];

    let mut dc1 = 0.0;
    let mut dc2 = 0.0;
    for (cfg, m, j, g) in links {
        let r = bloch_vec(t, m);
        let rf = bloch_vec(target, m);
        let a = cfg.sys_axis.index();
        if cfg.det_axis == Axis::Z {
            let rot = cross3(r, rf)[a - 1];
            let mut rot2 = rot;
            for ap in 1..=3usize {
                let (s, sf) = s_vectors(t, target, m, ap);
                rot2 += cross3(s, sf)[a - 1];
            }
            dc1 += 0.5 * dt * (-cfg.sign.value() * j * rot);
            dc2 += 0.5 * dt * (-cfg.sign.value() * j * rot2);
        } else {
            let mut dec = 0.0;
            let mut dec2 = 0.0;
            for alpha in 1..=3usize {
                if alpha == a {
                    continue;
                }
                dec += r[alpha - 1] * rf[alpha - 1];
                dec2 += r[alpha - 1] * rf[alpha - 1];
                for ap in 1..=3usize {
                    let (s, sf) = s_vectors(t, target, m, ap);
                    dec2 += s[alpha - 1] * sf[alpha - 1];
                }
            }
            dc1 += 0.5 * dt * g * dec;
            dc2 += 0.5 * dt * g * dec2;
        }
    }

    if pc.first.det_axis == Axis::X && pc.second.det_axis == Axis::X {
        let a1 = pc.first.sys_axis;
        let a2 = pc.second.sys_axis;
        let q = t.correlator(1, a1, 2, a2);
        let denom = (g1 + g2) * (g1 + g2) - 4.0 * g1 * g2 * q * q;
        if denom.abs() < DEGENERATE_TOL {
            // Degenerate ratio: fall back to the guarded generic rank-1 value.
            dc1 = expected_dc_rank(t, target, pc, 1, 2, 1);
        } else {
            dc1 += -dt * g1 * g2 * (g1 + g2) * n2_x_term(t, a1, a2) / denom;
        }
    }
    Ok((dc1, dc2))
}

/// Correlator rows/columns as effective single-qubit vectors: for qubit 1,
/// `S^α_{1;α'} = R_{α,α'}`; for qubit 2, `S^α_{2;α'} = R_{α',α}`.
fn s_vectors(t: &BlochTensor, target: &BlochTensor, m: usize, ap: usize) -> ([f64; 3], [f64; 3]) {
    let axis_p = Axis::from_index(ap).unwrap();
    let mut s = [0.0; 3];
    let mut sf = [0.0; 3];
    for alpha in 1..=3usize {
        let axis = Axis::from_index(alpha).unwrap();
        let (qa, qb, aa, ab) = if m == 1 {
            (1, 2, axis, axis_p)
        } else {
            (1, 2, axis_p, axis)
        };
        let pick = |tt: &BlochTensor| tt.correlator(qa, aa, qb, ab);
        s[alpha - 1] = pick(t);
        sf[alpha - 1] = pick(target);
    }
    (s, sf)
}

/// Spectator contribution of qubit 3 to `E[dC₁]` when steering pair (1,2) of
/// a three-qubit state: `Σ_μ E[(dR_{0,0,μ})²]/4`, which closes to
/// `δt Γ₁Γ₂(Γ₁+Γ₂) / [(Γ₁+Γ₂)² − 4Γ₁Γ₂Q²] · Σ_α (R_{a1,a2,α} − Q R_{0,0,α})²`
/// for same-axis transverse pairs and vanishes for every other config.
pub fn n3_spectator_dc1(t: &BlochTensor, pc: &PairConfig) -> Result<f64> {
    if t.n_qubits() != 3 {
        return Err(SteerError::Dimension(
            "spectator term requires 3 qubits with pair (1,2) steered".into(),
        ));
    }
    if classify(pc) != VarCase::SymmetricCross {
        return Ok(0.0);
    }
    let (g1, g2) = (pc.gamma1(), pc.gamma2());
    let lam = (g1 * g2).sqrt();
    let a1 = pc.first.sys_axis;
    let a2 = pc.second.sys_axis;
    let q = t.correlator(1, a1, 2, a2);
    let mut residual = 0.0;
    let mut deviations = [0.0; 3];
    for (k, axis) in Axis::ALL.iter().enumerate() {
        let idx = t.with_component(0, 3, axis.index());
        let steered = t.with_component(t.with_component(idx, 1, a1.index()), 2, a2.index());
        let d = t.get(steered) - q * t.get(idx);
        deviations[k] = d;
        residual += d * d;
    }
    let denom = (g1 + g2) * (g1 + g2) - 4.0 * g1 * g2 * q * q;
    if denom.abs() < DEGENERATE_TOL {
        // Guarded branch-by-branch evaluation of the same quantity.
        let cdc = [g1 + g2 + 2.0 * lam * q, g1 + g2 - 2.0 * lam * q];
        let mut acc = 0.0;
        for d in deviations {
            let v = lam * d;
            for c in cdc {
                if c >= BRANCH_TOL {
                    acc += 0.5 * pc.dt * v * v / c;
                }
            }
        }
        return Ok(acc);
    }
    Ok(pc.dt * g1 * g2 * (g1 + g2) / denom * residual)
}
