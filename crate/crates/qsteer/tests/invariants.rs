//! Property tests for structural invariants: probability normalization,
//! cost decompositions, batched-vs-reference gains, ring schedules, and
//! histogram bookkeeping.

use proptest::prelude::*;
use qsteer::bloch::bloch_from_state;
use qsteer::cost::{expected_dc, local_cost, total_cost, CostWeights, GainScan};
use qsteer::dynamics::{PairConfig, SteeringConfig};
use qsteer::engine::{schedule_pairs, Scheduler, TrajectoryRecord};
use qsteer::oracle::exact_pair_step;
use qsteer::pauli::{Axis, Sign};
use qsteer::state::StateVector;
use qsteer::stats::histogram;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> StateVector {
    loop {
        let amps = (0..1usize << n)
            .map(|_| num_complex::Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        if let Ok(s) = StateVector::from_amplitudes(n, amps) {
            return s;
        }
    }
}

fn random_config<R: Rng + ?Sized>(rng: &mut R) -> SteeringConfig {
    let sign = if rng.gen_bool(0.5) { Sign::Plus } else { Sign::Minus };
    let sys = Axis::ALL[rng.gen_range(0..3)];
    let det = Axis::ALL[rng.gen_range(0..3)];
    SteeringConfig::new(sign, sys, det)
}

fn random_weights<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CostWeights {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0) + 1e-3).collect();
    let sum: f64 = raw.iter().sum();
    CostWeights::new(raw.into_iter().map(|p| p / sum).collect()).unwrap()
}

fn summary_record(index: usize, converged: bool, n_steps: usize) -> TrajectoryRecord {
    TrajectoryRecord {
        index,
        converged,
        n_steps,
        final_fidelity: if converged { 0.995 } else { 0.5 },
        trapped_cycles: 0,
        curves: None,
        steps: None,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The four exact Bell-projection probabilities always sum to one.
    #[test]
    fn exact_branch_probabilities_sum_to_one(seed in any::<u64>(), big in any::<bool>(), dt in 0.02f64..0.3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = if big { 3 } else { 2 };
        let psi = random_state(n, &mut rng);
        let pc = PairConfig::new(
            random_config(&mut rng),
            random_config(&mut rng),
            rng.gen_range(0.4..1.2),
            rng.gen_range(0.4..1.2),
            dt,
        ).unwrap();
        let q1 = rng.gen_range(1..=n);
        let q2 = 1 + (q1 + rng.gen_range(0..n - 1)) % n;
        let total: f64 = exact_pair_step(&psi, &pc, q1, q2).iter().map(|b| b.probability).sum();
        prop_assert!((total - 1.0).abs() < 1e-12, "sum {total}");
    }

    /// `C = Σ_r p_r C_r` holds entry-for-entry against the rank costs.
    #[test]
    fn total_cost_is_the_weighted_rank_sum(seed in any::<u64>(), n in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = bloch_from_state(&random_state(n, &mut rng));
        let tf = bloch_from_state(&random_state(n, &mut rng));
        let w = random_weights(n, &mut rng);
        let total = total_cost(&t, &tf, &w);
        let by_rank: f64 = (1..=n).map(|r| w.rank_weight(r) * local_cost(&t, &tf, r)).sum();
        prop_assert!((total - by_rank).abs() < 1e-12, "{total} vs {by_rank}");
    }

    /// The batched per-axis gain scan reproduces the reference subset-sum
    /// expected cost change for every configuration pair.
    #[test]
    fn gain_scan_matches_reference(seed in any::<u64>(), n in 2usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = bloch_from_state(&random_state(n, &mut rng));
        let tf = bloch_from_state(&random_state(n, &mut rng));
        let w = random_weights(n, &mut rng);
        let (j1, j2) = (rng.gen_range(0.4..1.2), rng.gen_range(0.4..1.2));
        let dt = 0.2;
        let q1 = rng.gen_range(1..=n);
        let q2 = 1 + (q1 + rng.gen_range(0..n - 1)) % n;
        let scan = GainScan::new(&t, &tf, &w, q1, q2, j1, j2, dt);
        for _ in 0..6 {
            let (first, second) = (random_config(&mut rng), random_config(&mut rng));
            let pc = PairConfig::new(first, second, j1, j2, dt).unwrap();
            let fast = scan.gain(first, second);
            let reference = expected_dc(&t, &tf, &pc, q1, q2, &w);
            prop_assert!((fast - reference).abs() < 1e-10,
                "{} {}: {fast} vs {reference}", first.label(), second.label());
        }
    }

    /// Every schedule is a maximal matching of adjacent ring pairs.
    #[test]
    fn schedules_partition_the_ring(n in 2usize..=9, cycle in 0usize..64, random in any::<bool>()) {
        let scheduler = if random { Scheduler::Random } else { Scheduler::Alternating };
        let mut rng = ChaCha8Rng::seed_from_u64(cycle as u64);
        let pairs = schedule_pairs(n, cycle, scheduler, &mut rng);
        prop_assert_eq!(pairs.len(), n / 2);
        let mut used = std::collections::HashSet::new();
        for &(a, b) in &pairs {
            prop_assert!((1..=n).contains(&a) && (1..=n).contains(&b));
            prop_assert!(a % n + 1 == b || b % n + 1 == a, "({a},{b}) not adjacent on {n}-ring");
            prop_assert!(used.insert(a) && used.insert(b), "qubit steered twice");
        }
    }

    /// Rebinned histograms conserve counts and bin every converged record
    /// into the half-open interval that contains its step count.
    #[test]
    fn histograms_conserve_counts(
        steps in proptest::collection::vec((0usize..400, any::<bool>()), 1..80),
        width in 1usize..=50,
    ) {
        let records: Vec<TrajectoryRecord> = steps
            .iter()
            .enumerate()
            .map(|(i, &(n, conv))| summary_record(i, conv, n))
            .collect();
        let h = histogram(&records, width);
        prop_assert_eq!(h.total, records.len());
        prop_assert_eq!(h.converged, records.iter().filter(|r| r.converged).count());
        prop_assert_eq!(h.counts.iter().sum::<usize>(), h.converged);
        for r in records.iter().filter(|r| r.converged) {
            let k = (r.n_steps - h.origin) / h.bin_width;
            prop_assert!(h.bin_start(k) <= r.n_steps && r.n_steps < h.bin_end(k));
            prop_assert!(h.counts[k] > 0);
        }
    }

    /// Rank-weight ladders are probability distributions for any feasible
    /// anchor (the geometric tail must fit in the unit budget).
    #[test]
    fn weight_ladders_are_distributions(n in 1usize..=8, p1 in 0.0f64..=0.9) {
        let w = CostWeights::ladder(n, p1);
        let sum: f64 = w.as_slice().iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-12, "sum {sum}");
        prop_assert!(w.as_slice().iter().all(|p| *p >= 0.0));
        if n > 1 {
            prop_assert!((w.rank_weight(1) - p1).abs() < 1e-12);
        }
    }
}
