//! The wasm exports are plain Rust functions on a native target, so the
//! JSON contract the page relies on is tested here without a browser.

use qsteer_web::{ensemble_json, gain_landscape_json, trajectory_json};
use serde_json::Value;

fn parse(s: &str) -> Value {
    serde_json::from_str(s).expect("exported functions return valid JSON")
}

#[test]
fn trajectory_json_has_curves_and_converges() {
    let out = trajectory_json("bell", 2, 0.99, 0.2, 0.9, false, 7, 5000);
    let v = parse(&out);
    assert!(v.get("error").is_none(), "unexpected error: {v}");
    assert_eq!(v["converged"], Value::Bool(true));
    let n_steps = v["n_steps"].as_u64().unwrap() as usize;
    let f2 = v["f2"].as_array().unwrap();
    // Curves include cycle 0, so there are n_steps + 1 samples.
    assert_eq!(f2.len(), n_steps + 1);
    assert_eq!(v["c_total"].as_array().unwrap().len(), n_steps + 1);
    assert_eq!(v["entropy"].as_array().unwrap().len(), n_steps + 1);
    let first = f2[0].as_f64().unwrap();
    let last = f2[n_steps].as_f64().unwrap();
    assert!(last > first, "fidelity should rise from {first} to {last}");
    assert!(v["final_fidelity"].as_f64().unwrap() >= 0.99);
}

#[test]
fn trajectory_json_is_deterministic_in_the_seed() {
    let a = trajectory_json("ghz", 3, 0.975, 0.2, 0.9, false, 11, 5000);
    let b = trajectory_json("ghz", 3, 0.975, 0.2, 0.9, false, 11, 5000);
    let c = trajectory_json("ghz", 3, 0.975, 0.2, 0.9, false, 12, 5000);
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn ensemble_json_reports_histogram_and_stats() {
    let out = ensemble_json("bell", 2, 0.99, 0.2, 0.9, false, 5, 200, 1);
    let v = parse(&out);
    assert!(v.get("error").is_none(), "unexpected error: {v}");
    assert_eq!(v["m"], 200);
    let converged = v["converged"].as_u64().unwrap();
    assert!(converged >= 180, "only {converged}/200 converged");
    let counts = v["counts"].as_array().unwrap();
    let total: u64 = counts.iter().map(|c| c.as_u64().unwrap()).sum();
    assert_eq!(total, converged);
    let n_m = v["n_m"].as_u64().unwrap();
    assert!((2..=40).contains(&n_m), "mode {n_m} outside the Bell band");
    assert!(v["n_s"].as_f64().unwrap() > 0.0);
    assert!(v["delta_n"].as_u64().unwrap() >= 1);
    let fraction = v["fraction"].as_f64().unwrap();
    assert!((fraction - converged as f64 / 200.0).abs() < 1e-12);
}

#[test]
fn gain_landscape_json_is_square_and_marks_the_minimum() {
    // p1 = 0.9 mixes local and global costs; pure global weighting
    // (p1 = 0) leaves |00> trapped with every gain non-negative.
    let out = gain_landscape_json("zero", "bell", 0.2, 0.9, true);
    let v = parse(&out);
    assert!(v.get("error").is_none(), "unexpected error: {v}");
    let labels = v["labels"].as_array().unwrap();
    assert_eq!(labels.len(), 12);
    let gains = v["gains"].as_array().unwrap();
    assert_eq!(gains.len(), 12);
    let mut min = f64::INFINITY;
    for row in gains {
        let row = row.as_array().unwrap();
        assert_eq!(row.len(), 12);
        for g in row {
            min = min.min(g.as_f64().unwrap());
        }
    }
    let bi = v["best"][0].as_u64().unwrap() as usize;
    let bj = v["best"][1].as_u64().unwrap() as usize;
    let best = gains[bi][bj].as_f64().unwrap();
    assert!((best - min).abs() < 1e-15);
    assert!((best - v["best_gain"].as_f64().unwrap()).abs() < 1e-15);
    // Steering |00> toward a Bell state must offer a strictly useful move.
    assert!(min < -1e-6, "no useful gain found (min {min})");
}

#[test]
fn reduced_set_landscape_is_nine_by_nine() {
    let out = gain_landscape_json("plus_x", "ghz", 0.2, 0.9, false);
    let v = parse(&out);
    assert!(v.get("error").is_none(), "unexpected error: {v}");
    assert_eq!(v["labels"].as_array().unwrap().len(), 9);
    assert_eq!(v["gains"].as_array().unwrap().len(), 9);
}

#[test]
fn bad_inputs_return_error_objects() {
    for out in [
        trajectory_json("qubit-soup", 2, 0.99, 0.2, 0.9, false, 1, 100),
        trajectory_json("bell", 3, 0.99, 0.2, 0.9, false, 1, 100),
        trajectory_json("bell", 2, 0.99, 0.2, 1.5, false, 1, 100),
        trajectory_json("bell", 2, 1.5, 0.2, 0.9, false, 1, 100),
        ensemble_json("bell", 2, 0.99, 0.2, 0.9, false, 1, 0, 1),
        ensemble_json("bell", 2, 0.99, 0.2, 0.9, false, 1, 100, 0),
        gain_landscape_json("nowhere", "bell", 0.2, 0.9, true),
        gain_landscape_json("zero", "wumpus", 0.2, 0.9, true),
    ] {
        let v = parse(&out);
        assert!(
            v["error"].as_str().map(|s| !s.is_empty()).unwrap_or(false),
            "expected an error object, got {v}"
        );
    }
}
