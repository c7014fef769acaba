//! Machine-readable run artifacts: summary.json, histogram.csv,
//! curves.csv, and the optional per-trajectory records.csv.
//!
//! Numbers are written with Rust's default shortest-roundtrip formatting,
//! so identical inputs produce byte-identical files on every platform and
//! thread count.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use qsteer::stats::{AveragedCurves, ConvergenceHistogram};
use qsteer::{SummaryStats, TrajectoryRecord};
use serde::Serialize;

/// Contents of summary.json.  Wall time is deliberately absent: it goes to
/// stdout so that the files stay byte-identical for a given config + seed.
#[derive(Debug, Serialize)]
pub struct SummaryJson {
    pub n_qubits: usize,
    pub m: usize,
    pub bin_width: usize,
    pub converged: usize,
    pub converged_fraction: f64,
    /// Histogram mode N_m (null when nothing converged).
    pub n_m: Option<usize>,
    /// Median steps-to-convergence N_s.
    pub n_s: Option<f64>,
    /// Histogram half-maximum width ΔN.
    pub delta_n: Option<usize>,
}

impl SummaryJson {
    pub fn new(
        n_qubits: usize,
        m: usize,
        bin_width: usize,
        records: &[TrajectoryRecord],
        stats: Option<&SummaryStats>,
    ) -> Self {
        let converged = records.iter().filter(|r| r.converged).count();
        SummaryJson {
            n_qubits,
            m,
            bin_width,
            converged,
            converged_fraction: converged as f64 / m as f64,
            n_m: stats.map(|s| s.mode),
            n_s: stats.map(|s| s.median),
            delta_n: stats.map(|s| s.half_width),
        }
    }
}

pub fn write_summary(path: &Path, summary: &SummaryJson) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(summary).expect("plain struct serializes");
    text.push('\n');
    fs::write(path, text)
}

pub fn write_histogram(path: &Path, hist: &ConvergenceHistogram) -> std::io::Result<()> {
    let mut text = String::from("bin_start,bin_end,count\n");
    for (k, count) in hist.counts.iter().enumerate() {
        writeln!(text, "{},{},{}", hist.bin_start(k), hist.bin_end(k), count).unwrap();
    }
    fs::write(path, text)
}

pub fn write_curves(path: &Path, curves: &AveragedCurves) -> std::io::Result<()> {
    let mut text = String::from("cycle,mean_F2,se_F2,mean_C_total,se_C_total");
    for r in 1..=curves.mean_local.len() {
        write!(text, ",mean_C_{r}").unwrap();
    }
    text.push_str(",mean_S,se_S\n");
    for cycle in 0..=curves.horizon {
        write!(
            text,
            "{},{},{},{},{}",
            cycle,
            curves.mean_f2[cycle],
            curves.se_f2[cycle],
            curves.mean_total[cycle],
            curves.se_total[cycle]
        )
        .unwrap();
        for local in &curves.mean_local {
            write!(text, ",{}", local[cycle]).unwrap();
        }
        writeln!(text, ",{},{}", curves.mean_entropy[cycle], curves.se_entropy[cycle]).unwrap();
    }
    fs::write(path, text)
}

pub fn write_records(path: &Path, records: &[TrajectoryRecord]) -> std::io::Result<()> {
    let mut text = String::from("index,converged,n_steps,final_fidelity,trapped_cycles\n");
    for r in records {
        writeln!(
            text,
            "{},{},{},{},{}",
            r.index, r.converged, r.n_steps, r.final_fidelity, r.trapped_cycles
        )
        .unwrap();
    }
    fs::write(path, text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use qsteer::engine::{run_ensemble, ProtocolParams, RecordLevel};
    use qsteer::state::TargetSpec;
    use qsteer::Sign;

    fn tiny_ensemble() -> Vec<TrajectoryRecord> {
        let mut params = ProtocolParams::new(
            2,
            TargetSpec::Bell {
                xi: false,
                eta: Sign::Plus,
            },
        );
        params.seed = 3;
        params.record = RecordLevel::Curves;
        run_ensemble(&params, 8)
    }

    #[test]
    fn artifacts_have_the_documented_headers() {
        let records = tiny_ensemble();
        let dir = std::env::temp_dir().join("qsteer_output_test");
        std::fs::create_dir_all(&dir).unwrap();
        let hist = qsteer::histogram(&records, 1);
        let stats = qsteer::summarize(&records, 1).unwrap();
        let curves = qsteer::averaged_curves(&records, None).unwrap();

        let summary = SummaryJson::new(2, 8, 1, &records, Some(&stats));
        write_summary(&dir.join("summary.json"), &summary).unwrap();
        write_histogram(&dir.join("histogram.csv"), &hist).unwrap();
        write_curves(&dir.join("curves.csv"), &curves).unwrap();
        write_records(&dir.join("records.csv"), &records).unwrap();

        let summary_text = std::fs::read_to_string(dir.join("summary.json")).unwrap();
        assert!(summary_text.contains("\"n_m\""));
        assert!(!summary_text.contains("wall"), "wall time must stay out of artifacts");
        let hist_text = std::fs::read_to_string(dir.join("histogram.csv")).unwrap();
        assert!(hist_text.starts_with("bin_start,bin_end,count\n"));
        let curves_text = std::fs::read_to_string(dir.join("curves.csv")).unwrap();
        assert!(curves_text
            .starts_with("cycle,mean_F2,se_F2,mean_C_total,se_C_total,mean_C_1,mean_C_2,mean_S,se_S\n"));
        assert_eq!(
            curves_text.lines().count(),
            curves.horizon + 2,
            "one row per cycle plus the header"
        );
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
