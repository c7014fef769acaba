//! Ensemble statistics: steps-to-convergence histograms, mode/median/
//! half-width summaries, and averaged observable curves with frozen tails.

use crate::engine::TrajectoryRecord;
use crate::{Result, SteerError};

/// Binned distribution of steps-to-convergence over an ensemble.
///
/// Bins are anchored at the smallest converged step count; bin `k` covers
/// `[origin + k·w, origin + (k+1)·w)`.  Non-converged trajectories are not
/// binned but counted in `total`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvergenceHistogram {
    pub bin_width: usize,
    pub origin: usize,
    pub counts: Vec<usize>,
    pub total: usize,
    pub converged: usize,
}

impl ConvergenceHistogram {
    pub fn bin_start(&self, k: usize) -> usize {
        self.origin + k * self.bin_width
    }

    /// Exclusive upper edge of bin `k`.
    pub fn bin_end(&self, k: usize) -> usize {
        self.bin_start(k) + self.bin_width
    }

    pub fn converged_fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.converged as f64 / self.total as f64
        }
    }

    fn max_count(&self) -> usize {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    /// Center of the highest bin (ties resolved toward the smallest bin).
    pub fn mode(&self) -> Option<usize> {
        let max = self.max_count();
        if max == 0 {
            return None;
        }
        let k = self.counts.iter().position(|&c| c == max).unwrap();
        Some(self.bin_start(k) + (self.bin_width - 1) / 2)
    }

    /// Width of the region between the outermost bins whose counts reach
    /// half the maximum count.
    pub fn half_width(&self) -> Option<usize> {
        let max = self.max_count();
        if max == 0 {
            return None;
        }
        let above = |c: &usize| 2 * c >= max;
        let first = self.counts.iter().position(above).unwrap();
        let last = self.counts.iter().rposition(above).unwrap();
        Some((last - first + 1) * self.bin_width)
    }
}

/// Bins the converged step counts of an ensemble.
pub fn histogram(records: &[TrajectoryRecord], bin_width: usize) -> ConvergenceHistogram {
    assert!(bin_width >= 1, "bin width must be at least one step");
    let steps: Vec<usize> = records
        .iter()
        .filter(|r| r.converged)
        .map(|r| r.n_steps)
        .collect();
    let total = records.len();
    let converged = steps.len();
    if steps.is_empty() {
        return ConvergenceHistogram {
            bin_width,
            origin: 0,
            counts: Vec::new(),
            total,
            converged,
        };
    }
    let origin = *steps.iter().min().unwrap();
    let top = *steps.iter().max().unwrap();
    let mut counts = vec![0usize; (top - origin) / bin_width + 1];
    for s in steps {
        counts[(s - origin) / bin_width] += 1;
    }
    ConvergenceHistogram {
        bin_width,
        origin,
        counts,
        total,
        converged,
    }
}

/// Headline convergence statistics of an ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryStats {
    /// Mode N_m: center of the most populated histogram bin.
    pub mode: usize,
    /// Median N_s over converged trajectories.
    pub median: f64,
    /// Half-maximum width ΔN of the histogram.
    pub half_width: usize,
    pub converged_fraction: f64,
}

/// Computes mode, median, and half-width of the steps-to-convergence
/// distribution.  Non-converged trajectories only enter the fraction.
pub fn summarize(records: &[TrajectoryRecord], bin_width: usize) -> Result<SummaryStats> {
    let hist = histogram(records, bin_width);
    let (mode, half_width) = match (hist.mode(), hist.half_width()) {
        (Some(m), Some(w)) => (m, w),
        _ => {
            return Err(SteerError::InvalidParameter(
                "no converged trajectories to summarize".into(),
            ))
        }
    };
    let mut steps: Vec<usize> = records
        .iter()
        .filter(|r| r.converged)
        .map(|r| r.n_steps)
        .collect();
    steps.sort_unstable();
    let k = steps.len();
    let median = if k % 2 == 1 {
        steps[k / 2] as f64
    } else {
        (steps[k / 2 - 1] + steps[k / 2]) as f64 / 2.0
    };
    Ok(SummaryStats {
        mode,
        median,
        half_width,
        converged_fraction: hist.converged_fraction(),
    })
}

/// Ensemble means (and standard errors where meaningful) per cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragedCurves {
    /// Means cover cycles `0..=horizon`.
    pub horizon: usize,
    pub mean_f2: Vec<f64>,
    pub se_f2: Vec<f64>,
    pub mean_total: Vec<f64>,
    pub se_total: Vec<f64>,
    /// `mean_local[r-1][cycle]` is the mean rank-r cost.
    pub mean_local: Vec<Vec<f64>>,
    pub mean_entropy: Vec<f64>,
    pub se_entropy: Vec<f64>,
}

fn mean_se(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

/// Value of a per-cycle series at `cycle`, frozen at its last recorded
/// entry once the trajectory has stopped (converged trajectories hold their
/// threshold-crossing values).
fn frozen(series: &[f64], cycle: usize) -> f64 {
    series[cycle.min(series.len() - 1)]
}

/// Averages recorded curves over the ensemble.  Trajectories that stopped
/// before `horizon` contribute their frozen final values to later cycles.
/// `horizon` defaults to the longest recorded trajectory.
pub fn averaged_curves(
    records: &[TrajectoryRecord],
    horizon: Option<usize>,
) -> Result<AveragedCurves> {
    if records.is_empty() {
        return Err(SteerError::InvalidParameter(
            "cannot average an empty ensemble".into(),
        ));
    }
    let curves: Vec<_> = records
        .iter()
        .map(|r| {
            r.curves.as_ref().ok_or_else(|| {
                SteerError::InvalidParameter(
                    "records lack curve data (record level below Curves)".into(),
                )
            })
        })
        .collect::<Result<_>>()?;
    let n_ranks = curves[0].local_costs.len();
    let horizon = horizon
        .unwrap_or_else(|| curves.iter().map(|c| c.fidelity_sq.len() - 1).max().unwrap());
    let mut out = AveragedCurves {
        horizon,
        mean_f2: Vec::with_capacity(horizon + 1),
        se_f2: Vec::with_capacity(horizon + 1),
        mean_total: Vec::with_capacity(horizon + 1),
        se_total: Vec::with_capacity(horizon + 1),
        mean_local: vec![Vec::with_capacity(horizon + 1); n_ranks],
        mean_entropy: Vec::with_capacity(horizon + 1),
        se_entropy: Vec::with_capacity(horizon + 1),
    };
    let mut column = Vec::with_capacity(curves.len());
    for cycle in 0..=horizon {
        let mut fill = |pick: &dyn Fn(&crate::engine::CurveData) -> &[f64]| -> (f64, f64) {
            column.clear();
            column.extend(curves.iter().map(|c| frozen(pick(c), cycle)));
            mean_se(&column)
        };
        let (m, s) = fill(&|c| &c.fidelity_sq);
        out.mean_f2.push(m);
        out.se_f2.push(s);
        let (m, s) = fill(&|c| &c.total_cost);
        out.mean_total.push(m);
        out.se_total.push(s);
        let (m, s) = fill(&|c| &c.entropy);
        out.mean_entropy.push(m);
        out.se_entropy.push(s);
        for r in 0..n_ranks {
            let (m, _) = fill(&|c| &c.local_costs[r]);
            out.mean_local[r].push(m);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::CurveData;

    fn record(n_steps: usize, converged: bool) -> TrajectoryRecord {
        TrajectoryRecord {
            index: 0,
            converged,
            n_steps,
            final_fidelity: 0.99,
            trapped_cycles: 0,
            curves: None,
            steps: None,
        }
    }

    fn record_with_curve(f2: Vec<f64>) -> TrajectoryRecord {
        let len = f2.len();
        TrajectoryRecord {
            curves: Some(CurveData {
                fidelity_sq: f2,
                total_cost: vec![0.5; len],
                local_costs: vec![vec![0.25; len], vec![0.5; len]],
                entropy: vec![0.1; len],
            }),
            ..record(len - 1, true)
        }
    }

    #[test]
    fn single_record_statistics() {
        let recs = vec![record(7, true)];
        let s = summarize(&recs, 1).unwrap();
        assert_eq!(s.mode, 7);
        assert_eq!(s.median, 7.0);
        assert_eq!(s.half_width, 1);
        assert_eq!(s.converged_fraction, 1.0);
        let s = summarize(&recs, 25).unwrap();
        assert_eq!(s.half_width, 25);
        assert_eq!(s.mode, 7 + 12);
    }

    #[test]
    fn symmetric_distribution_median_matches_mode() {
        let steps = [5, 6, 6, 7, 7, 7, 8, 8, 9];
        let recs: Vec<_> = steps.iter().map(|&s| record(s, true)).collect();
        let s = summarize(&recs, 1).unwrap();
        assert_eq!(s.mode, 7);
        assert_eq!(s.median, 7.0);
    }

    #[test]
    fn histogram_counts_and_rebinning_conserve_totals() {
        let steps = [3, 4, 4, 5, 9, 9, 9, 14];
        let mut recs: Vec<_> = steps.iter().map(|&s| record(s, true)).collect();
        recs.push(record(500, false));
        let h1 = histogram(&recs, 1);
        assert_eq!(h1.origin, 3);
        assert_eq!(h1.counts.iter().sum::<usize>(), 8);
        assert_eq!(h1.total, 9);
        assert!((h1.converged_fraction() - 8.0 / 9.0).abs() < 1e-15);
        let h4 = histogram(&recs, 4);
        assert_eq!(h4.counts.iter().sum::<usize>(), 8);
        // Bins [3,7), [7,11), [11,15): counts 4, 3, 1.
        assert_eq!(h4.counts, vec![4, 3, 1]);
        assert_eq!(h4.bin_end(0), 7);
    }

    #[test]
    fn half_width_spans_outermost_crossings() {
        // Counts per unit bin: 2,4,1,0,3 starting at 10 → bins with count
        // ≥ 2 are indices 0,1,4 → width (4-0+1)·1 = 5.
        let mut steps = vec![10, 10, 11, 11, 11, 11, 12, 14, 14, 14];
        let recs: Vec<_> = steps.drain(..).map(|s| record(s, true)).collect();
        let s = summarize(&recs, 1).unwrap();
        assert_eq!(s.mode, 11);
        assert_eq!(s.half_width, 5);
    }

    #[test]
    fn mode_tie_resolves_to_smaller_bin() {
        let steps = [4, 4, 9, 9];
        let recs: Vec<_> = steps.iter().map(|&s| record(s, true)).collect();
        assert_eq!(summarize(&recs, 1).unwrap().mode, 4);
    }

    #[test]
    fn summarize_is_permutation_invariant() {
        let steps = [12, 3, 7, 7, 20, 5];
        let recs: Vec<_> = steps.iter().map(|&s| record(s, true)).collect();
        let mut rev = recs.clone();
        rev.reverse();
        assert_eq!(summarize(&recs, 2).unwrap(), summarize(&rev, 2).unwrap());
    }

    #[test]
    fn zero_converged_records_error() {
        let recs = vec![record(100, false)];
        assert!(summarize(&recs, 1).is_err());
        let h = histogram(&recs, 1);
        assert_eq!(h.converged, 0);
        assert!(h.mode().is_none());
    }

    #[test]
    fn identical_records_average_to_themselves() {
        let recs = vec![
            record_with_curve(vec![0.2, 0.6, 0.995]),
            record_with_curve(vec![0.2, 0.6, 0.995]),
        ];
        let avg = averaged_curves(&recs, None).unwrap();
        assert_eq!(avg.horizon, 2);
        assert_eq!(avg.mean_f2, vec![0.2, 0.6, 0.995]);
        assert_eq!(avg.se_f2, vec![0.0, 0.0, 0.0]);
        assert_eq!(avg.mean_local[0], vec![0.25, 0.25, 0.25]);
    }

    #[test]
    fn tails_freeze_at_crossing_values() {
        let recs = vec![
            record_with_curve(vec![0.3, 0.991]),
            record_with_curve(vec![0.1, 0.5, 0.7, 0.992]),
        ];
        let avg = averaged_curves(&recs, Some(5)).unwrap();
        assert_eq!(avg.mean_f2.len(), 6);
        // First record holds 0.991 from cycle 1 onward.
        assert!((avg.mean_f2[3] - (0.991 + 0.992) / 2.0).abs() < 1e-15);
        assert!((avg.mean_f2[5] - (0.991 + 0.992) / 2.0).abs() < 1e-15);
        assert!((avg.mean_f2[1] - (0.991 + 0.5) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn averaging_requires_curves() {
        let recs = vec![record(5, true)];
        assert!(averaged_curves(&recs, None).is_err());
        assert!(averaged_curves(&[], None).is_err());
    }
}
