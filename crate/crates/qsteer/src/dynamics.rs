//! Steering configurations and the measurement-conditioned dynamics of
//! one detector pair.
//!
//! Each register qubit of an adjacent pair `(q1, q2)` couples to its own
//! detector qubit for a time `dt` through
//! `s_m J_m sigma_{q_m}^{alpha_m} tau_m^{beta_m}`; the detector pair is
//! then measured in the Bell basis. The outcome splits into a symmetry
//! label `eta` and a jump bit. Integrating the detectors out exactly to
//! first order in `dt` leaves, per outcome, either a jump operator or a
//! deterministic short-time evolution on the register; both are sums of
//! at most a few Pauli terms and are built here.

use crate::bloch::BlochTensor;
use crate::pauli::{epsilon, third_axis, Axis, PauliOp, PauliTerm, Sign, I, ONE};
use crate::state::StateVector;
use crate::{Result, SteerError};
use num_complex::Complex64;
use rand::Rng;

/// Couplings with `J * dt` above this are outside the weak-measurement
/// regime the first-order step is built for.
pub const WEAK_LIMIT_MAX_JDT: f64 = 0.5;

/// Probabilities may dip below zero by at most this before the step is
/// rejected as too coarse.
const PROB_TOL: f64 = 1e-9;

/// Squared norms below this mean the branch has vanishing probability.
const BRANCH_TOL: f64 = 1e-14;

/// One steering choice for a single qubit-detector link: a sign, the
/// register Pauli axis, and the detector Pauli axis.
///
/// When the detector axis is transverse (x or y) the sign is a gauge
/// choice with no physical effect, so it is pinned to `+`; only
/// longitudinal (z) couplings carry both signs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SteeringConfig {
    pub sign: Sign,
    pub sys_axis: Axis,
    pub det_axis: Axis,
}

impl SteeringConfig {
    pub fn new(sign: Sign, sys_axis: Axis, det_axis: Axis) -> Self {
        let sign = if det_axis == Axis::Z { sign } else { Sign::Plus };
        SteeringConfig { sign, sys_axis, det_axis }
    }

    /// Detector coupled along z: generates coherent rotations, no jumps.
    pub fn is_longitudinal(&self) -> bool {
        self.det_axis == Axis::Z
    }

    /// Detector coupled along x or y: generates jumps and decay.
    pub fn is_transverse(&self) -> bool {
        !self.is_longitudinal()
    }

    /// Complex transverse amplitude (1 for x, i for y, 0 for z) entering
    /// the jump operator.
    fn transverse_amp(&self) -> Complex64 {
        match self.det_axis {
            Axis::X => ONE,
            Axis::Y => I,
            Axis::Z => Complex64::new(0.0, 0.0),
        }
    }

    /// Compact label like `+xz`.
    pub fn label(&self) -> String {
        format!("{}{}{}", self.sign.label(), self.sys_axis.label(), self.det_axis.label())
    }
}

/// All admissible single-link steering choices in canonical order:
/// detector axis x (then optionally y), then z; register axis x, y, z
/// within each; both signs only for detector axis z.
///
/// `allow_det_y` keeps the detector-y couplings; without them 9 choices
/// remain, with them 12.
pub fn enumerate_configs(allow_det_y: bool) -> Vec<SteeringConfig> {
    let mut det_axes = vec![Axis::X];
    if allow_det_y {
        det_axes.push(Axis::Y);
    }
    det_axes.push(Axis::Z);
    let mut out = Vec::new();
    for &det in &det_axes {
        for sys in Axis::ALL {
            if det == Axis::Z {
                for sign in Sign::ALL {
                    out.push(SteeringConfig::new(sign, sys, det));
                }
            } else {
                out.push(SteeringConfig::new(Sign::Plus, sys, det));
            }
        }
    }
    out
}

/// Bell measurement outcome of one detector pair: `jump` is the parity
/// bit (true selects the flipped-detector sector) and `eta` the relative
/// sign of the Bell superposition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MeasurementOutcome {
    pub jump: bool,
    pub eta: Sign,
}

impl MeasurementOutcome {
    /// Fixed sampling order: (0,+), (0,-), (1,+), (1,-).
    pub const ALL: [MeasurementOutcome; 4] = [
        MeasurementOutcome { jump: false, eta: Sign::Plus },
        MeasurementOutcome { jump: false, eta: Sign::Minus },
        MeasurementOutcome { jump: true, eta: Sign::Plus },
        MeasurementOutcome { jump: true, eta: Sign::Minus },
    ];

    pub fn index(&self) -> usize {
        (self.jump as usize) * 2 + (self.eta == Sign::Minus) as usize
    }

    pub fn label(&self) -> &'static str {
        match (self.jump, self.eta) {
            (false, Sign::Plus) => "0+",
            (false, Sign::Minus) => "0-",
            (true, Sign::Plus) => "1+",
            (true, Sign::Minus) => "1-",
        }
    }
}

/// Full steering choice for one detector pair: a link config and
/// coupling strength per qubit, plus the coupling time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairConfig {
    pub first: SteeringConfig,
    pub second: SteeringConfig,
    pub j1: f64,
    pub j2: f64,
    pub dt: f64,
}

impl PairConfig {
    pub fn new(
        first: SteeringConfig,
        second: SteeringConfig,
        j1: f64,
        j2: f64,
        dt: f64,
    ) -> Result<Self> {
        if !(j1 > 0.0) || !(j2 > 0.0) {
            return Err(SteerError::InvalidParameter(format!(
                "couplings must be positive, got j1 = {j1}, j2 = {j2}"
            )));
        }
        if !(dt > 0.0) {
            return Err(SteerError::InvalidParameter(format!(
                "coupling time must be positive, got dt = {dt}"
            )));
        }
        Ok(PairConfig { first, second, j1, j2, dt })
    }

    /// Both links with the same coupling strength.
    pub fn symmetric(first: SteeringConfig, second: SteeringConfig, j: f64, dt: f64) -> Result<Self> {
        Self::new(first, second, j, j, dt)
    }

    /// Measurement-induced decay rate of the first link, `Gamma = J^2 dt`.
    pub fn gamma1(&self) -> f64 {
        self.j1 * self.j1 * self.dt
    }

    pub fn gamma2(&self) -> f64 {
        self.j2 * self.j2 * self.dt
    }

    /// True when both links satisfy `J dt <= 0.5`.
    pub fn weak_limit_ok(&self) -> bool {
        self.j1 * self.dt <= WEAK_LIMIT_MAX_JDT && self.j2 * self.dt <= WEAK_LIMIT_MAX_JDT
    }

    /// Indicator that both detector axes are transverse and equal
    /// (both x or both y).
    fn sym_cross(&self) -> bool {
        self.first.is_transverse() && self.first.det_axis == self.second.det_axis
    }

    /// Indicator that the detector axes are the two distinct transverse
    /// ones (one x, one y).
    fn anti_cross(&self) -> bool {
        self.first.is_transverse()
            && self.second.is_transverse()
            && self.first.det_axis != self.second.det_axis
    }

    /// Bell label whose `c^dag c` governs the no-jump projection `eta`.
    ///
    /// For two detector-y couplings the exact `(|00> + eta |11>)/sqrt(2)`
    /// projection carries the cross term with the opposite sign from the
    /// detector-x case (the two flip amplitudes contribute `i^2`), so the
    /// no-jump sector `eta` pairs with `c_{-eta}^dag c_{-eta}`.  The jump
    /// sector always pairs with its own label.
    pub(crate) fn no_jump_cross_eta(&self, eta: Sign) -> Sign {
        if self.sym_cross() && self.first.det_axis == Axis::Y {
            eta.flipped()
        } else {
            eta
        }
    }

    /// Coherent generator of the no-jump evolution in sector `eta`:
    /// longitudinal steering terms plus the measurement-induced exchange
    /// coupling present when the detector axes are transverse and
    /// distinct.
    pub fn effective_hamiltonian(&self, q1: usize, q2: usize, eta: Sign) -> PauliOp {
        let mut terms = Vec::new();
        for (q, cfg, j) in [(q1, self.first, self.j1), (q2, self.second, self.j2)] {
            if cfg.is_longitudinal() {
                terms.push(PauliTerm::single(
                    Complex64::new(cfg.sign.value() * j, 0.0),
                    q,
                    cfg.sys_axis,
                ));
            }
        }
        if self.anti_cross() {
            let lamb = eta.value() * (self.gamma1() * self.gamma2()).sqrt();
            terms.push(PauliTerm::pair(
                Complex64::new(lamb, 0.0),
                q1,
                self.first.sys_axis,
                q2,
                self.second.sys_axis,
            ));
        }
        PauliOp::new(terms)
    }

    /// Jump operator of sector `eta`; empty when both links are
    /// longitudinal.
    ///
    /// When only one link is transverse, the other link rotates the
    /// register during the same time step, so the bare jump Pauli is
    /// dressed with that first-order rotation (the links act on different
    /// qubits and commute).  Without the dressing the conditioned jump
    /// state is accurate only to first order in δt.
    pub fn jump_operator(&self, q1: usize, q2: usize, eta: Sign) -> PauliOp {
        let mut terms = Vec::new();
        let amp1 = self.first.transverse_amp();
        let amp2 = self.second.transverse_amp();
        let zero = Complex64::new(0.0, 0.0);
        if amp1 != zero {
            let c = -I * amp1 * eta.value() * self.gamma1().sqrt();
            terms.push(PauliTerm::single(c, q1, self.first.sys_axis));
            if amp2 == zero {
                terms.push(PauliTerm::pair(
                    c * -I * self.dt * self.second.sign.value() * self.j2,
                    q1,
                    self.first.sys_axis,
                    q2,
                    self.second.sys_axis,
                ));
            }
        }
        if amp2 != zero {
            let c = -I * amp2 * self.gamma2().sqrt();
            terms.push(PauliTerm::single(c, q2, self.second.sys_axis));
            if amp1 == zero {
                terms.push(PauliTerm::pair(
                    c * -I * self.dt * self.first.sign.value() * self.j1,
                    q1,
                    self.first.sys_axis,
                    q2,
                    self.second.sys_axis,
                ));
            }
        }
        PauliOp::new(terms)
    }

    /// `c_eta^dag c_eta` expanded to Pauli terms: a constant decay part
    /// and, when both detector axes are equal and transverse, an
    /// eta-dependent two-qubit exchange part.
    pub fn cdc_operator(&self, q1: usize, q2: usize, eta: Sign) -> PauliOp {
        let mut terms = Vec::new();
        let decay = self.gamma1() * self.first.is_transverse() as u8 as f64
            + self.gamma2() * self.second.is_transverse() as u8 as f64;
        if decay > 0.0 {
            terms.push(PauliTerm::identity(Complex64::new(decay, 0.0)));
        }
        if self.sym_cross() {
            let cross = 2.0 * eta.value() * (self.gamma1() * self.gamma2()).sqrt();
            terms.push(PauliTerm::pair(
                Complex64::new(cross, 0.0),
                q1,
                self.first.sys_axis,
                q2,
                self.second.sys_axis,
            ));
        }
        PauliOp::new(terms)
    }

    /// `<c_eta^dag c_eta>` read off a Bloch tensor.
    pub fn expectation_cdc(&self, t: &BlochTensor, q1: usize, q2: usize, eta: Sign) -> f64 {
        let mut val = self.gamma1() * self.first.is_transverse() as u8 as f64
            + self.gamma2() * self.second.is_transverse() as u8 as f64;
        if self.sym_cross() {
            val += 2.0
                * eta.value()
                * (self.gamma1() * self.gamma2()).sqrt()
                * t.correlator(q1, self.first.sys_axis, q2, self.second.sys_axis);
        }
        val
    }

    /// First-order evolution operator of the no-jump sector `eta`:
    /// `1 - i dt H_eta - (dt/2) c_eta^dag c_eta`.
    pub fn no_jump_operator(&self, q1: usize, q2: usize, eta: Sign) -> PauliOp {
        let mut terms = vec![PauliTerm::identity(ONE)];
        for t in self.effective_hamiltonian(q1, q2, eta).terms {
            terms.push(PauliTerm { coeff: -I * self.dt * t.coeff, factors: t.factors });
        }
        for t in self.cdc_operator(q1, q2, self.no_jump_cross_eta(eta)).terms {
            terms.push(PauliTerm { coeff: -0.5 * self.dt * t.coeff, factors: t.factors });
        }
        PauliOp::new(terms)
    }

    /// The operator applied to the register for a given Bell outcome.
    pub fn outcome_operator(&self, q1: usize, q2: usize, outcome: MeasurementOutcome) -> PauliOp {
        if outcome.jump {
            self.jump_operator(q1, q2, outcome.eta)
        } else {
            self.no_jump_operator(q1, q2, outcome.eta)
        }
    }

    /// Probabilities of the four Bell outcomes in `MeasurementOutcome::ALL`
    /// order: `P(1,eta) = dt <cdc_eta>/2` and `P(0,eta) = (1 - dt <cdc_etb>)/2`
    /// with `etb` the no-jump pairing of `eta` (flipped for two detector-y
    /// couplings, see [`no_jump_cross_eta`]).  Values within `-1e-9` of zero
    /// are clamped; anything lower means the step is too coarse and is an
    /// error.
    pub fn outcome_probabilities(&self, t: &BlochTensor, q1: usize, q2: usize) -> Result<[f64; 4]> {
        let mut probs = [0.0f64; 4];
        for eta in Sign::ALL {
            let p_jump = 0.5 * self.dt * self.expectation_cdc(t, q1, q2, eta);
            let p_stay =
                0.5 * (1.0 - self.dt * self.expectation_cdc(t, q1, q2, self.no_jump_cross_eta(eta)));
            probs[MeasurementOutcome { jump: false, eta }.index()] = p_stay;
            probs[MeasurementOutcome { jump: true, eta }.index()] = p_jump;
        }
        for p in &mut probs {
            if *p < 0.0 {
                if *p < -PROB_TOL {
                    return Err(SteerError::NegativeProbability(*p));
                }
                *p = 0.0;
            }
        }
        Ok(probs)
    }

    /// One stochastic step: apply the outcome operator and renormalize
    /// exactly. The jump branch is exact; the no-jump branch is accurate
    /// to O(dt^2) per step.
    pub fn sse_step(
        &self,
        psi: &StateVector,
        q1: usize,
        q2: usize,
        outcome: MeasurementOutcome,
    ) -> Result<StateVector> {
        let raw = self.outcome_operator(q1, q2, outcome).apply(psi);
        let n2 = raw.amplitudes().iter().map(|a| a.norm_sqr()).sum::<f64>();
        if n2 < BRANCH_TOL {
            return Err(SteerError::ZeroProbabilityBranch);
        }
        raw.normalized()
    }

    /// Outcome-averaged first-order change of every Bloch coefficient:
    /// longitudinal links rotate the steered qubit around its register
    /// axis, transverse links decay every coefficient that anticommutes
    /// with the steered axis. All eta-odd contributions cancel in the
    /// average.
    pub fn lindblad_avg_dr(&self, t: &BlochTensor, q1: usize, q2: usize) -> Vec<f64> {
        let mut out = vec![0.0; t.len()];
        for (q, cfg, j, gamma) in [
            (q1, self.first, self.j1, self.gamma1()),
            (q2, self.second, self.j2, self.gamma2()),
        ] {
            let alpha = cfg.sys_axis.index();
            for idx in 0..t.len() {
                let mu = t.component_at(idx, q);
                if mu == 0 || mu == alpha {
                    continue;
                }
                if cfg.is_longitudinal() {
                    let bar = third_axis(alpha, mu).unwrap();
                    out[idx] += -2.0
                        * self.dt
                        * cfg.sign.value()
                        * j
                        * epsilon(alpha, mu, bar)
                        * t.get(t.with_component(idx, q, bar));
                } else {
                    out[idx] += -2.0 * self.dt * gamma * t.get(idx);
                }
            }
        }
        out
    }
}

/// Inverse-CDF sample over the four outcomes; falls back to the last
/// positive-probability bin if rounding pushes the draw past the total.
pub fn sample_outcome<R: Rng + ?Sized>(probs: &[f64; 4], rng: &mut R) -> MeasurementOutcome {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last_positive = None;
    for outcome in MeasurementOutcome::ALL {
        let p = probs[outcome.index()];
        if p > 0.0 {
            acc += p;
            last_positive = Some(outcome);
            if u < acc {
                return outcome;
            }
        }
    }
    last_positive.expect("outcome distribution has no positive entry")
}
