//! Browser bindings: three interactive views onto the steering simulator,
//! exported through wasm-bindgen.  Every function takes primitives and
//! returns a JSON string (an `{"error": …}` object on bad input), so the
//! page needs no generated TypeScript and the crate tests natively.

use qsteer::bloch::bloch_from_state;
use qsteer::cost::GainScan;
use qsteer::engine::{run_trajectory_indexed, ProtocolParams, RecordLevel, SteeringSet};
use qsteer::state::{make_target, TargetSpec};
use qsteer::stats::histogram;
use qsteer::{CostWeights, Sign};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn parse_target(name: &str) -> Result<TargetSpec, String> {
    match name {
        "bell" => Ok(TargetSpec::Bell {
            xi: false,
            eta: Sign::Plus,
        }),
        "ghz" => Ok(TargetSpec::Ghz),
        "w" => Ok(TargetSpec::W),
        other => Err(format!("unknown target '{other}' (expected bell, ghz, or w)")),
    }
}

fn build_params(
    target: &str,
    n_qubits: usize,
    f_star: f64,
    dt: f64,
    p1: f64,
    full_set: bool,
    seed: u32,
    max_steps: u32,
) -> Result<ProtocolParams, String> {
    if !(0.0..=0.9).contains(&p1) {
        return Err(format!("p1 = {p1} outside [0, 0.9]"));
    }
    let mut params = ProtocolParams::new(n_qubits, parse_target(target)?);
    params.f_star = f_star;
    params.dt = dt;
    params.weights = CostWeights::ladder(n_qubits, p1);
    params.steering_set = if full_set {
        SteeringSet::Full12
    } else {
        SteeringSet::NoBetaY
    };
    params.seed = u64::from(seed);
    params.max_steps = max_steps as usize;
    params.validate().map_err(|e| e.to_string())?;
    Ok(params)
}

fn error_json(msg: String) -> String {
    json!({ "error": msg }).to_string()
}

/// One steered trajectory: per-cycle fidelity², total cost, and block
/// entropy, for the time-trace plot.
#[wasm_bindgen]
pub fn trajectory_json(
    target: &str,
    n_qubits: usize,
    f_star: f64,
    dt: f64,
    p1: f64,
    full_set: bool,
    seed: u32,
    max_steps: u32,
) -> String {
    let params = match build_params(target, n_qubits, f_star, dt, p1, full_set, seed, max_steps) {
        Ok(p) => p,
        Err(e) => return error_json(e),
    };
    let record = run_trajectory_indexed(&params, 0);
    let curves = record.curves.expect("trajectory recorded at curve level");
    json!({
        "converged": record.converged,
        "n_steps": record.n_steps,
        "final_fidelity": record.final_fidelity,
        "f2": curves.fidelity_sq,
        "c_total": curves.total_cost,
        "entropy": curves.entropy,
    })
    .to_string()
}

/// Steps-to-convergence histogram of a small ensemble, with the mode /
/// median / half-width headline numbers.
#[wasm_bindgen]
pub fn ensemble_json(
    target: &str,
    n_qubits: usize,
    f_star: f64,
    dt: f64,
    p1: f64,
    full_set: bool,
    seed: u32,
    m: u32,
    bin_width: u32,
) -> String {
    if m == 0 || m > 2000 {
        return error_json(format!("ensemble size {m} outside 1..=2000"));
    }
    if bin_width == 0 {
        return error_json("bin width must be at least 1".into());
    }
    let mut params = match build_params(target, n_qubits, f_star, dt, p1, full_set, seed, 5_000) {
        Ok(p) => p,
        Err(e) => return error_json(e),
    };
    params.record = RecordLevel::Summary;
    let records: Vec<_> = (0..m as usize)
        .map(|i| run_trajectory_indexed(&params, i))
        .collect();
    let hist = histogram(&records, bin_width as usize);
    let mut steps: Vec<usize> = records
        .iter()
        .filter(|r| r.converged)
        .map(|r| r.n_steps)
        .collect();
    steps.sort_unstable();
    let median = match steps.len() {
        0 => serde_json::Value::Null,
        k if k % 2 == 1 => json!(steps[k / 2]),
        k => json!((steps[k / 2 - 1] + steps[k / 2]) as f64 / 2.0),
    };
    json!({
        "m": m,
        "converged": hist.converged,
        "fraction": hist.converged_fraction(),
        "origin": hist.origin,
        "bin_width": hist.bin_width,
        "counts": hist.counts,
        "n_m": hist.mode(),
        "n_s": median,
        "delta_n": hist.half_width(),
    })
    .to_string()
}

/// Expected-gain landscape over all two-qubit configuration pairs at a
/// named starting state, for the selection heatmap.  Gains are the
/// decision quantity the greedy policy minimizes each cycle.
#[wasm_bindgen]
pub fn gain_landscape_json(state: &str, target: &str, dt: f64, p1: f64, full_set: bool) -> String {
    let start = match state {
        "zero" => TargetSpec::Product(vec![0, 0]),
        "bell" => TargetSpec::Bell {
            xi: false,
            eta: Sign::Plus,
        },
        "plus_x" => TargetSpec::Custom(vec![0.5.into(), 0.5.into(), 0.5.into(), 0.5.into()]),
        other => return error_json(format!("unknown state '{other}'")),
    };
    if !(0.0..=0.9).contains(&p1) {
        return error_json(format!("p1 = {p1} outside [0, 0.9]"));
    }
    // The landscape view is two-qubit; GHZ and W remain valid targets
    // there (GHZ reduces to the even Bell state).
    let target_spec = match parse_target(target) {
        Ok(t) => t,
        Err(e) => return error_json(e),
    };
    let psi = match make_target(2, &start) {
        Ok(s) => s,
        Err(e) => return error_json(e.to_string()),
    };
    let tf = match make_target(2, &target_spec) {
        Ok(s) => bloch_from_state(&s),
        Err(e) => return error_json(e.to_string()),
    };
    let t = bloch_from_state(&psi);
    let weights = CostWeights::ladder(2, p1);
    let scan = GainScan::new(&t, &tf, &weights, 1, 2, 1.0, 1.0, dt);
    let configs = qsteer::dynamics::enumerate_configs(full_set);
    let labels: Vec<String> = configs.iter().map(|c| c.label()).collect();
    let mut gains = Vec::with_capacity(configs.len());
    let mut best = f64::INFINITY;
    let mut best_pair = (0usize, 0usize);
    for (i, &first) in configs.iter().enumerate() {
        let mut row = Vec::with_capacity(configs.len());
        for (j, &second) in configs.iter().enumerate() {
            let g = scan.gain(first, second);
            if g < best {
                best = g;
                best_pair = (i, j);
            }
            row.push(g);
        }
        gains.push(row);
    }
    json!({
        "labels": labels,
        "gains": gains,
        "best": [best_pair.0, best_pair.1],
        "best_gain": best,
    })
    .to_string()
}
