//! The active steering loop: pair scheduling, greedy configuration
//! selection with tie-breaking, stochastic stepping, and trajectory
//! recording up to the fidelity threshold.

use crate::bloch::{bloch_from_state, BlochTensor};
use crate::cost::{local_cost, total_cost, CostWeights, GainScan};
use crate::dynamics::{
    enumerate_configs, sample_outcome, MeasurementOutcome, PairConfig, SteeringConfig,
};
use crate::state::{entanglement_entropy, make_target, StateVector, TargetSpec};
use crate::{Result, SteerError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Strict tie merging: only configurations whose expected gain matches the
/// minimum to within arithmetic noise count as ties.
pub const TIE_TOL: f64 = 1e-12;
/// Default selection window (see [`ProtocolParams::tie_tolerance`]).  A
/// purely strict argmin stalls in flat regions of the gain landscape —
/// symmetric flip-flop orbits and invariant manifolds where no move is
/// strictly improving; a small window restores ergodicity and reproduces
/// the benchmark convergence statistics.
pub const DEFAULT_TIE_TOLERANCE: f64 = 1e-3;
/// A selection whose best expected gain exceeds this (negative) level is
/// recorded as trapped: no enumerated configuration improves the cost.
pub const TRAP_TOL: f64 = -1e-12;

/// How the ⌊N/2⌋ disjoint adjacent pairs are laid out each cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheduler {
    /// Deterministically alternate the matching offset from cycle to cycle.
    Alternating,
    /// Draw a uniformly random maximal matching of the ring each cycle.
    Random,
}

/// Which steering configurations the greedy policy may choose from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteeringSet {
    /// All 12 configurations, including detector axis y.
    Full12,
    /// The 9-configuration set without detector axis y.
    NoBetaY,
}

impl SteeringSet {
    pub fn configs(self) -> Vec<SteeringConfig> {
        enumerate_configs(self == SteeringSet::Full12)
    }
}

/// Verbosity of the per-trajectory record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RecordLevel {
    /// Convergence outcome only.
    Summary,
    /// Adds per-cycle fidelity, cost, and entropy curves.
    Curves,
    /// Adds per-pair configuration and outcome logs.
    Steps,
}

/// Full parameter set of one steering run.
#[derive(Debug, Clone)]
pub struct ProtocolParams {
    pub n_qubits: usize,
    /// Time step δt of one steering-and-measurement cycle.
    pub dt: f64,
    /// Per-qubit system-detector couplings J (indexed by qubit − 1).
    pub couplings: Vec<f64>,
    pub weights: CostWeights,
    /// Fidelity threshold F* at which steering stops.
    pub f_star: f64,
    /// Cycle cap for non-converging trajectories.
    pub max_steps: usize,
    pub scheduler: Scheduler,
    pub steering_set: SteeringSet,
    /// Selection window above the minimum expected gain within which
    /// configurations count as ties (drawn from uniformly).  [`TIE_TOL`]
    /// merges exact-arithmetic ties only; the default
    /// [`DEFAULT_TIE_TOLERANCE`] additionally tolerates slightly
    /// suboptimal moves, which is required to leave flat regions of the
    /// gain landscape (e.g. the maximally entangled two-qubit manifold
    /// when steering toward a product state, or the flip-flop orbits that
    /// otherwise strand a few percent of trajectories short of threshold).
    pub tie_tolerance: f64,
    pub seed: u64,
    pub target: TargetSpec,
    pub initial: TargetSpec,
    pub record: RecordLevel,
    /// Qubits forming side A of the recorded entropy bipartition
    /// (strictly increasing, 1-based); default `{1..⌊N/2⌋}`.
    pub entropy_cut: Option<Vec<usize>>,
}

impl ProtocolParams {
    /// Benchmark defaults: δt = 0.2, unit couplings, 0.9/0.1-ladder
    /// weights, F* = 0.99, alternating scheduler, no detector-y axis.
    pub fn new(n_qubits: usize, target: TargetSpec) -> Self {
        ProtocolParams {
            n_qubits,
            dt: 0.2,
            couplings: vec![1.0; n_qubits],
            weights: CostWeights::default_for(n_qubits),
            f_star: 0.99,
            max_steps: 5_000,
            scheduler: Scheduler::Alternating,
            steering_set: SteeringSet::NoBetaY,
            tie_tolerance: DEFAULT_TIE_TOLERANCE,
            seed: 0,
            target,
            initial: TargetSpec::Product(vec![0; n_qubits]),
            record: RecordLevel::Curves,
            entropy_cut: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_qubits;
        if n < 2 {
            return Err(SteerError::InvalidParameter(
                "need at least two system qubits".into(),
            ));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(SteerError::InvalidParameter("dt must be positive".into()));
        }
        if !(self.f_star > 0.0 && self.f_star <= 1.0) {
            return Err(SteerError::InvalidParameter(
                "f_star must lie in (0, 1]".into(),
            ));
        }
        if self.max_steps == 0 {
            return Err(SteerError::InvalidParameter("max_steps must be ≥ 1".into()));
        }
        if !(self.tie_tolerance >= 0.0 && self.tie_tolerance.is_finite()) {
            return Err(SteerError::InvalidParameter(
                "tie_tolerance must be finite and non-negative".into(),
            ));
        }
        if self.couplings.len() != n {
            return Err(SteerError::InvalidParameter(format!(
                "expected {n} couplings, got {}",
                self.couplings.len()
            )));
        }
        if self.couplings.iter().any(|j| !(j.is_finite() && *j > 0.0)) {
            return Err(SteerError::InvalidParameter(
                "couplings must be positive".into(),
            ));
        }
        if self.weights.len() != n {
            return Err(SteerError::InvalidParameter(format!(
                "expected {n} cost weights, got {}",
                self.weights.len()
            )));
        }
        if let Some(cut) = &self.entropy_cut {
            let ordered = cut.windows(2).all(|w| w[0] < w[1]);
            if cut.is_empty() || !ordered || cut[0] < 1 || *cut.last().unwrap() > n || cut.len() >= n
            {
                return Err(SteerError::InvalidParameter(
                    "entropy cut must be a proper ordered subset of 1..=N".into(),
                ));
            }
        }
        make_target(n, &self.target)?;
        make_target(n, &self.initial)?;
        Ok(())
    }

    /// True when every coupling satisfies the weak-measurement bound
    /// J·δt ≤ 0.5 under which the first-order update is trustworthy.
    pub fn weak_limit_ok(&self) -> bool {
        self.couplings.iter().all(|j| j * self.dt <= 0.5 + 1e-12)
    }

    fn entropy_cut_qubits(&self) -> Vec<usize> {
        self.entropy_cut
            .clone()
            .unwrap_or_else(|| (1..=self.n_qubits / 2).collect())
    }
}

/// One steered pair within a cycle: what was chosen and what happened.
#[derive(Debug, Clone, PartialEq)]
pub struct PairOutcomeRecord {
    pub q1: usize,
    pub q2: usize,
    pub config: PairConfig,
    pub outcome: MeasurementOutcome,
    /// Expected cost change of the chosen configuration at selection time.
    pub expected_gain: f64,
    /// No enumerated configuration improved the cost for this pair.
    pub trapped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub cycle: usize,
    pub pairs: Vec<PairOutcomeRecord>,
}

/// Per-cycle observables, indexed by cycle starting at 0 (the initial state).
#[derive(Debug, Clone, PartialEq)]
pub struct CurveData {
    pub fidelity_sq: Vec<f64>,
    pub total_cost: Vec<f64>,
    /// `local_costs[r-1][cycle]` is the rank-r cost C_r.
    pub local_costs: Vec<Vec<f64>>,
    pub entropy: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub index: usize,
    pub converged: bool,
    /// Cycles executed before the threshold crossing (or the cap).
    pub n_steps: usize,
    pub final_fidelity: f64,
    /// Number of pair selections for which no configuration improved the cost.
    pub trapped_cycles: usize,
    pub curves: Option<CurveData>,
    pub steps: Option<Vec<StepRecord>>,
}

/// Lays out ⌊N/2⌋ disjoint adjacent pairs on the periodic qubit ring.
///
/// Even N admits exactly two perfect matchings (offset 0 or 1); odd N leaves
/// one qubit unmatched, and the N matchings are indexed by that qubit.  The
/// alternating scheduler cycles through them; the random scheduler draws one
/// uniformly from the trajectory RNG.
pub fn schedule_pairs<R: Rng + ?Sized>(
    n: usize,
    cycle: usize,
    scheduler: Scheduler,
    rng: &mut R,
) -> Vec<(usize, usize)> {
    assert!(n >= 2, "need at least one qubit pair");
    if n == 2 {
        return vec![(1, 2)];
    }
    let wrap = |q: usize| (q - 1) % n + 1;
    if n % 2 == 0 {
        let offset = match scheduler {
            Scheduler::Alternating => cycle % 2,
            Scheduler::Random => rng.gen_range(0..2usize),
        };
        (0..n / 2)
            .map(|k| (wrap(2 * k + 1 + offset), wrap(2 * k + 2 + offset)))
            .collect()
    } else {
        let skip = match scheduler {
            Scheduler::Alternating => cycle % n,
            Scheduler::Random => rng.gen_range(0..n),
        };
        (0..n / 2)
            .map(|k| (wrap(skip + 2 * k + 2), wrap(skip + 2 * k + 3)))
            .collect()
    }
}

/// Greedy policy for one pair: evaluates the expected cost change of every
/// configuration combination, draws uniformly among ties within the
/// configured tie tolerance of the minimum, and flags the selection as
/// trapped when even the best choice fails to improve the cost.
pub fn select_config<R: Rng + ?Sized>(
    t: &BlochTensor,
    target: &BlochTensor,
    params: &ProtocolParams,
    q1: usize,
    q2: usize,
    rng: &mut R,
) -> (PairConfig, f64, bool) {
    let j1 = params.couplings[q1 - 1];
    let j2 = params.couplings[q2 - 1];
    let scan = GainScan::new(t, target, &params.weights, q1, q2, j1, j2, params.dt);
    let configs = params.steering_set.configs();
    let mut gains = Vec::with_capacity(configs.len() * configs.len());
    let mut best = f64::INFINITY;
    for &first in &configs {
        for &second in &configs {
            let g = scan.gain(first, second);
            if g < best {
                best = g;
            }
            gains.push((first, second, g));
        }
    }
    let ties: Vec<usize> = gains
        .iter()
        .enumerate()
        .filter(|(_, (_, _, g))| *g <= best + params.tie_tolerance)
        .map(|(i, _)| i)
        .collect();
    let pick = if ties.len() > 1 {
        ties[rng.gen_range(0..ties.len())]
    } else {
        ties[0]
    };
    let (first, second, gain) = gains[pick];
    let pc = PairConfig::new(first, second, j1, j2, params.dt).expect("validated couplings");
    (pc, gain, best > TRAP_TOL)
}

/// Executes one full cycle over the given disjoint pairs.
///
/// Decisions are simultaneous: each pair is scored against the state at the
/// start of the cycle.  Outcome sampling is sequential — the steering
/// operators of disjoint pairs commute, so the joint outcome distribution
/// factorizes exactly through the conditional single-pair updates.
pub fn run_step<R: Rng + ?Sized>(
    psi: &mut StateVector,
    t: &mut BlochTensor,
    target: &BlochTensor,
    pairs: &[(usize, usize)],
    params: &ProtocolParams,
    rng: &mut R,
) -> Result<Vec<PairOutcomeRecord>> {
    let snapshot = t.clone();
    let selections: Vec<_> = pairs
        .iter()
        .map(|&(q1, q2)| select_config(&snapshot, target, params, q1, q2, rng))
        .collect();
    let mut records = Vec::with_capacity(pairs.len());
    for (&(q1, q2), (pc, expected_gain, trapped)) in pairs.iter().zip(selections) {
        let probs = pc.outcome_probabilities(t, q1, q2)?;
        let outcome = sample_outcome(&probs, rng);
        *psi = pc.sse_step(psi, q1, q2, outcome)?;
        t.apply_pair_op(q1, q2, &pc.outcome_operator(q1, q2, outcome))?;
        debug_assert!(
            t.deviation_from_state(psi) < 1e-9,
            "incremental Bloch update drifted from the state"
        );
        records.push(PairOutcomeRecord {
            q1,
            q2,
            config: pc,
            outcome,
            expected_gain,
            trapped,
        });
    }
    Ok(records)
}

fn push_curve_point(
    curves: &mut CurveData,
    t: &BlochTensor,
    target: &BlochTensor,
    psi: &StateVector,
    fidelity: f64,
    cut: &[usize],
    params: &ProtocolParams,
) {
    curves.fidelity_sq.push(fidelity * fidelity);
    curves.total_cost.push(total_cost(t, target, &params.weights));
    for r in 1..=params.n_qubits {
        curves.local_costs[r - 1].push(local_cost(t, target, r));
    }
    let s = entanglement_entropy(psi, cut).expect("validated entropy cut");
    curves.entropy.push(s);
}

/// Runs one trajectory on RNG stream `index` of the base seed.
pub fn run_trajectory_indexed(params: &ProtocolParams, index: usize) -> TrajectoryRecord {
    params.validate().expect("invalid protocol parameters");
    let n = params.n_qubits;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(index as u64);
    let target = make_target(n, &params.target).expect("validated target");
    let mut psi = make_target(n, &params.initial).expect("validated initial state");
    let tf = bloch_from_state(&target);
    let mut t = bloch_from_state(&psi);
    let cut = params.entropy_cut_qubits();
    let mut curves = (params.record >= RecordLevel::Curves).then(|| CurveData {
        fidelity_sq: Vec::new(),
        total_cost: Vec::new(),
        local_costs: vec![Vec::new(); n],
        entropy: Vec::new(),
    });
    let mut steps = (params.record == RecordLevel::Steps).then(Vec::new);
    let mut trapped_cycles = 0usize;
    let mut fidelity = psi.fidelity(&target);
    if let Some(c) = curves.as_mut() {
        push_curve_point(c, &t, &tf, &psi, fidelity, &cut, params);
    }
    let mut converged = fidelity >= params.f_star;
    let mut n_steps = 0usize;
    while !converged && n_steps < params.max_steps {
        let pairs = schedule_pairs(n, n_steps, params.scheduler, &mut rng);
        let recs =
            run_step(&mut psi, &mut t, &tf, &pairs, params, &mut rng).expect("validated step");
        trapped_cycles += recs.iter().filter(|r| r.trapped).count();
        if let Some(s) = steps.as_mut() {
            s.push(StepRecord {
                cycle: n_steps,
                pairs: recs,
            });
        }
        n_steps += 1;
        fidelity = psi.fidelity(&target);
        if let Some(c) = curves.as_mut() {
            push_curve_point(c, &t, &tf, &psi, fidelity, &cut, params);
        }
        converged = fidelity >= params.f_star;
    }
    TrajectoryRecord {
        index,
        converged,
        n_steps,
        final_fidelity: fidelity,
        trapped_cycles,
        curves,
        steps,
    }
}

/// Runs a single trajectory on stream 0.
pub fn run_trajectory(params: &ProtocolParams) -> TrajectoryRecord {
    run_trajectory_indexed(params, 0)
}

/// Runs `m` independent trajectories on streams `0..m` of the base seed.
/// Results are identical regardless of thread count or iteration order.
#[cfg(feature = "parallel")]
pub fn run_ensemble(params: &ProtocolParams, m: usize) -> Vec<TrajectoryRecord> {
    use rayon::prelude::*;
    params.validate().expect("invalid protocol parameters");
    (0..m)
        .into_par_iter()
        .map(|i| run_trajectory_indexed(params, i))
        .collect()
}

/// Runs `m` independent trajectories on streams `0..m` of the base seed.
#[cfg(not(feature = "parallel"))]
pub fn run_ensemble(params: &ProtocolParams, m: usize) -> Vec<TrajectoryRecord> {
    params.validate().expect("invalid protocol parameters");
    (0..m).map(|i| run_trajectory_indexed(params, i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{Axis, Sign};

    fn ring_adjacent(n: usize, q1: usize, q2: usize) -> bool {
        let succ = |q: usize| q % n + 1;
        succ(q1) == q2 || succ(q2) == q1
    }

    #[test]
    fn alternating_schedule_matches_ring_layout() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            schedule_pairs(4, 0, Scheduler::Alternating, &mut rng),
            vec![(1, 2), (3, 4)]
        );
        assert_eq!(
            schedule_pairs(4, 1, Scheduler::Alternating, &mut rng),
            vec![(2, 3), (4, 1)]
        );
        assert_eq!(schedule_pairs(2, 7, Scheduler::Alternating, &mut rng), vec![(1, 2)]);
        // Odd ring: one pair per cycle, rotating through all three matchings.
        let seen: Vec<_> = (0..3)
            .map(|c| schedule_pairs(3, c, Scheduler::Alternating, &mut rng)[0])
            .collect();
        assert_eq!(seen, vec![(2, 3), (3, 1), (1, 2)]);
    }

    #[test]
    fn random_schedule_draws_valid_matchings() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [4usize, 5, 6, 7] {
            let mut distinct = std::collections::HashSet::new();
            for cycle in 0..60 {
                let pairs = schedule_pairs(n, cycle, Scheduler::Random, &mut rng);
                assert_eq!(pairs.len(), n / 2);
                let mut used = std::collections::HashSet::new();
                for &(a, b) in &pairs {
                    assert!(ring_adjacent(n, a, b), "non-adjacent pair ({a},{b}) on {n}-ring");
                    assert!(used.insert(a) && used.insert(b), "pair overlap");
                }
                distinct.insert(pairs);
            }
            let expected = if n % 2 == 0 { 2 } else { n };
            assert_eq!(distinct.len(), expected, "matching coverage for N={n}");
        }
    }

    #[test]
    fn trapped_selection_flagged_for_pure_global_weights() {
        let psi = StateVector::zero_state(2);
        let target = make_target(2, &TargetSpec::Bell { xi: false, eta: Sign::Plus }).unwrap();
        let mut params = ProtocolParams::new(2, TargetSpec::Bell { xi: false, eta: Sign::Plus });
        params.weights = CostWeights::new(vec![0.0, 1.0]).unwrap();
        let t = bloch_from_state(&psi);
        let tf = bloch_from_state(&target);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (_, gain, trapped) = select_config(&t, &tf, &params, 1, 2, &mut rng);
        assert!(trapped);
        assert!(gain >= -1e-12);
    }

    #[test]
    fn escape_configuration_uses_transverse_links() {
        // From |00⟩ toward a Bell state with mixed weights, the only
        // improving move couples both qubits transversally with a common
        // detector axis; x and y detector axes are exactly degenerate.
        let psi = StateVector::zero_state(2);
        let target = make_target(2, &TargetSpec::Bell { xi: false, eta: Sign::Plus }).unwrap();
        let params = ProtocolParams::new(2, TargetSpec::Bell { xi: false, eta: Sign::Plus });
        let t = bloch_from_state(&psi);
        let tf = bloch_from_state(&target);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let (pc, gain, trapped) = select_config(&t, &tf, &params, 1, 2, &mut rng);
            assert!(!trapped);
            assert!(gain < -1e-6);
            assert!(pc.first.is_transverse() && pc.second.is_transverse());
            assert_eq!(pc.first.det_axis, pc.second.det_axis);
        }
    }

    #[test]
    fn disjoint_pair_steps_commute() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let amps = (0..16)
            .map(|_| num_complex::Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let psi = StateVector::from_amplitudes(4, amps).unwrap();
        let ca = PairConfig::new(
            SteeringConfig::new(Sign::Plus, Axis::X, Axis::X),
            SteeringConfig::new(Sign::Minus, Axis::Z, Axis::Z),
            1.0,
            0.7,
            0.2,
        )
        .unwrap();
        let cb = PairConfig::new(
            SteeringConfig::new(Sign::Plus, Axis::Y, Axis::X),
            SteeringConfig::new(Sign::Plus, Axis::X, Axis::Z),
            0.9,
            1.2,
            0.2,
        )
        .unwrap();
        let o1 = MeasurementOutcome { jump: true, eta: Sign::Minus };
        let o2 = MeasurementOutcome { jump: false, eta: Sign::Plus };
        let ab = cb
            .sse_step(&ca.sse_step(&psi, 1, 2, o1).unwrap(), 3, 4, o2)
            .unwrap();
        let ba = ca
            .sse_step(&cb.sse_step(&psi, 3, 4, o2).unwrap(), 1, 2, o1)
            .unwrap();
        let diff: f64 = ab
            .amplitudes()
            .iter()
            .zip(ba.amplitudes())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-10, "disjoint pair updates must commute, diff={diff}");
    }

    #[test]
    fn incremental_bloch_stays_consistent() {
        let mut params = ProtocolParams::new(3, TargetSpec::Ghz);
        params.f_star = 0.999;
        params.max_steps = 40;
        let target = make_target(3, &params.target).unwrap();
        let mut psi = make_target(3, &params.initial).unwrap();
        let tf = bloch_from_state(&target);
        let mut t = bloch_from_state(&psi);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for cycle in 0..40 {
            let pairs = schedule_pairs(3, cycle, Scheduler::Alternating, &mut rng);
            run_step(&mut psi, &mut t, &tf, &pairs, &params, &mut rng).unwrap();
            assert!(t.deviation_from_state(&psi) < 1e-9);
        }
    }

    #[test]
    fn initial_equals_target_converges_without_steps() {
        let mut params = ProtocolParams::new(2, TargetSpec::Bell { xi: false, eta: Sign::Plus });
        params.initial = TargetSpec::Bell { xi: false, eta: Sign::Plus };
        let rec = run_trajectory(&params);
        assert!(rec.converged);
        assert_eq!(rec.n_steps, 0);
        let curves = rec.curves.unwrap();
        assert_eq!(curves.fidelity_sq.len(), 1);
        assert!((curves.fidelity_sq[0] - 1.0).abs() < 1e-12);
        assert!(curves.total_cost[0].abs() < 1e-12);
    }

    #[test]
    fn bell_trajectory_converges_and_records_crossing() {
        let mut params = ProtocolParams::new(2, TargetSpec::Bell { xi: false, eta: Sign::Plus });
        params.record = RecordLevel::Steps;
        params.max_steps = 2_000;
        let rec = run_trajectory(&params);
        assert!(rec.converged, "N=2 Bell steering should converge");
        assert!(rec.final_fidelity >= params.f_star);
        let curves = rec.curves.as_ref().unwrap();
        assert_eq!(curves.fidelity_sq.len(), rec.n_steps + 1);
        assert_eq!(rec.steps.as_ref().unwrap().len(), rec.n_steps);
        // Fidelity below threshold at every recorded cycle before the last.
        for &f2 in &curves.fidelity_sq[..rec.n_steps] {
            assert!(f2.sqrt() < params.f_star);
        }
        for f2 in &curves.fidelity_sq {
            assert!((0.0..=1.0 + 1e-12).contains(f2));
        }
    }

    #[test]
    fn trajectories_are_deterministic_per_stream() {
        let mut params = ProtocolParams::new(2, TargetSpec::Bell { xi: true, eta: Sign::Minus });
        params.record = RecordLevel::Steps;
        params.seed = 99;
        let a = run_trajectory_indexed(&params, 4);
        let b = run_trajectory_indexed(&params, 4);
        assert_eq!(a, b);
        let c = run_trajectory_indexed(&params, 5);
        assert_ne!(
            a.steps.as_ref().unwrap(),
            c.steps.as_ref().unwrap(),
            "different streams should diverge"
        );
    }

    #[test]
    fn ensemble_matches_indexed_runs() {
        let mut params = ProtocolParams::new(2, TargetSpec::Bell { xi: false, eta: Sign::Plus });
        params.record = RecordLevel::Summary;
        params.seed = 5;
        let records = run_ensemble(&params, 4);
        assert_eq!(records.len(), 4);
        for (i, rec) in records.iter().enumerate() {
            assert_eq!(rec.index, i);
            assert_eq!(*rec, run_trajectory_indexed(&params, i));
        }
    }
}
