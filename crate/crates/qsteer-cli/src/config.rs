//! Flat key = value run configuration: parsing, validation, and the
//! bundled benchmark configs.

use std::collections::HashMap;

use qsteer::{
    CostWeights, ProtocolParams, RecordLevel, Scheduler, Sign, SteeringSet, TargetSpec,
};

/// Benchmark configs compiled into the binary; `--config NAME` falls back
/// to these when no file of that name exists.
pub const BUNDLED: &[(&str, &str)] = &[
    (
        "bell_n2_fstar99",
        include_str!("../configs/bell_n2_fstar99.conf"),
    ),
    (
        "w_n3_fstar975",
        include_str!("../configs/w_n3_fstar975.conf"),
    ),
];

pub fn bundled(name: &str) -> Option<&'static str> {
    BUNDLED
        .iter()
        .find(|(key, _)| *key == name)
        .map(|(_, text)| *text)
}

/// Everything one `run` needs: protocol parameters plus ensemble size and
/// output shaping.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: ProtocolParams,
    /// Ensemble size M.
    pub m: usize,
    /// Histogram bin width in cycles.
    pub bin_width: usize,
    /// Also write per-trajectory records.csv.
    pub out_records: bool,
    /// The p1 the weight ladder was built from, when given that way
    /// (re-used to rebuild weights in N sweeps).
    pub p1: Option<f64>,
}

/// Default histogram bin width for an N-qubit run, matched to the typical
/// spread of steps-to-convergence at each size.
pub fn default_bin_width(n_qubits: usize) -> usize {
    match n_qubits {
        2 => 1,
        3 => 25,
        4 => 200,
        _ => 100,
    }
}

const KNOWN_KEYS: &[&str] = &[
    "n_qubits",
    "target",
    "initial",
    "m",
    "dt",
    "couplings",
    "weights",
    "p1",
    "f_star",
    "max_steps",
    "scheduler",
    "steering_set",
    "tie_tol",
    "seed",
    "record",
    "entropy_cut",
    "bin_width",
    "out_records",
];

fn parse_lines(text: &str) -> Result<HashMap<String, String>, String> {
    let mut map = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key = value", lineno + 1))?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(format!("line {}: unknown key '{key}'", lineno + 1));
        }
        if map.insert(key.clone(), value).is_some() {
            return Err(format!("line {}: duplicate key '{key}'", lineno + 1));
        }
    }
    Ok(map)
}

fn parse_num<T: std::str::FromStr>(map: &HashMap<String, String>, key: &str) -> Result<Option<T>, String> {
    match map.get(key) {
        None => Ok(None),
        Some(v) => v
            .parse::<T>()
            .map(Some)
            .map_err(|_| format!("key '{key}': cannot parse '{v}'")),
    }
}

fn parse_list_f64(value: &str, key: &str) -> Result<Vec<f64>, String> {
    value
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| format!("key '{key}': cannot parse '{}'", s.trim()))
        })
        .collect()
}

/// Parses `bell`, `bell:XI,ETA`, `ghz`, `w`, or `product:BITS` into a
/// target family.
pub fn parse_target(value: &str) -> Result<TargetSpec, String> {
    let (head, rest) = match value.split_once(':') {
        Some((h, r)) => (h.trim(), Some(r.trim())),
        None => (value.trim(), None),
    };
    match (head, rest) {
        ("bell", None) => Ok(TargetSpec::Bell {
            xi: false,
            eta: Sign::Plus,
        }),
        ("bell", Some(args)) => {
            let (xi, eta) = args
                .split_once(',')
                .ok_or_else(|| format!("bell target '{value}': expected bell:XI,ETA"))?;
            let xi = match xi.trim() {
                "0" => false,
                "1" => true,
                other => return Err(format!("bell parity must be 0 or 1, got '{other}'")),
            };
            let eta = match eta.trim() {
                "+" => Sign::Plus,
                "-" => Sign::Minus,
                other => return Err(format!("bell sign must be + or -, got '{other}'")),
            };
            Ok(TargetSpec::Bell { xi, eta })
        }
        ("ghz", None) => Ok(TargetSpec::Ghz),
        ("w", None) => Ok(TargetSpec::W),
        ("product", Some(bits)) => {
            let bits: Result<Vec<u8>, String> = bits
                .chars()
                .map(|c| match c {
                    '0' => Ok(0),
                    '1' => Ok(1),
                    other => Err(format!("product bits must be 0/1, got '{other}'")),
                })
                .collect();
            Ok(TargetSpec::Product(bits?))
        }
        _ => Err(format!(
            "unknown state '{value}' (expected bell[:XI,ETA], ghz, w, or product:BITS)"
        )),
    }
}

/// Parses a flat key = value config into a validated [`RunConfig`].
pub fn parse_config(text: &str) -> Result<RunConfig, String> {
    let map = parse_lines(text)?;
    let n_qubits: usize = parse_num(&map, "n_qubits")?.ok_or("missing required key 'n_qubits'")?;
    let target = parse_target(map.get("target").ok_or("missing required key 'target'")?)?;

    let mut params = ProtocolParams::new(n_qubits, target);
    if let Some(initial) = map.get("initial") {
        params.initial = parse_target(initial)?;
    }
    if let Some(dt) = parse_num::<f64>(&map, "dt")? {
        params.dt = dt;
    }
    if let Some(couplings) = map.get("couplings") {
        let values = parse_list_f64(couplings, "couplings")?;
        params.couplings = match values.len() {
            1 => vec![values[0]; n_qubits],
            k if k == n_qubits => values,
            k => {
                return Err(format!(
                    "key 'couplings': expected 1 or {n_qubits} values, got {k}"
                ))
            }
        };
    }
    let p1 = parse_num::<f64>(&map, "p1")?;
    match (map.get("weights"), p1) {
        (Some(_), Some(_)) => {
            return Err("keys 'weights' and 'p1' are mutually exclusive".into())
        }
        (Some(w), None) => {
            let values = parse_list_f64(w, "weights")?;
            params.weights =
                CostWeights::new(values).map_err(|e| format!("key 'weights': {e}"))?;
        }
        (None, Some(p1)) => {
            if !(0.0..=1.0).contains(&p1) {
                return Err(format!("key 'p1': {p1} outside [0, 1]"));
            }
            let laddered: f64 = (0..n_qubits.saturating_sub(1))
                .map(|k| p1 * 0.1f64.powi(k as i32))
                .sum();
            if laddered > 1.0 + 1e-12 {
                return Err(format!(
                    "key 'p1': the 0.1-ladder from {p1} exceeds the unit weight budget"
                ));
            }
            params.weights = CostWeights::ladder(n_qubits, p1);
        }
        (None, None) => {}
    }
    if let Some(f_star) = parse_num::<f64>(&map, "f_star")? {
        params.f_star = f_star;
    }
    if let Some(max_steps) = parse_num::<usize>(&map, "max_steps")? {
        params.max_steps = max_steps;
    }
    if let Some(s) = map.get("scheduler") {
        params.scheduler = match s.as_str() {
            "alternating" => Scheduler::Alternating,
            "random" => Scheduler::Random,
            other => return Err(format!("key 'scheduler': unknown value '{other}'")),
        };
    }
    if let Some(s) = map.get("steering_set") {
        params.steering_set = match s.as_str() {
            "full12" => SteeringSet::Full12,
            "no_beta_y" => SteeringSet::NoBetaY,
            other => return Err(format!("key 'steering_set': unknown value '{other}'")),
        };
    }
    if let Some(tol) = parse_num::<f64>(&map, "tie_tol")? {
        params.tie_tolerance = tol;
    }
    if let Some(seed) = parse_num::<u64>(&map, "seed")? {
        params.seed = seed;
    }
    if let Some(r) = map.get("record") {
        params.record = match r.as_str() {
            "summary" => RecordLevel::Summary,
            "curves" => RecordLevel::Curves,
            "steps" => RecordLevel::Steps,
            other => return Err(format!("key 'record': unknown value '{other}'")),
        };
    }
    if let Some(cut) = map.get("entropy_cut") {
        let qubits: Result<Vec<usize>, String> = cut
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| format!("key 'entropy_cut': cannot parse '{}'", s.trim()))
            })
            .collect();
        params.entropy_cut = Some(qubits?);
    }
    params.validate().map_err(|e| e.to_string())?;

    let m = parse_num::<usize>(&map, "m")?.unwrap_or(1000);
    if m == 0 {
        return Err("key 'm': ensemble size must be at least 1".into());
    }
    let bin_width =
        parse_num::<usize>(&map, "bin_width")?.unwrap_or_else(|| default_bin_width(n_qubits));
    if bin_width == 0 {
        return Err("key 'bin_width': must be at least 1".into());
    }
    let out_records = match map.get("out_records").map(String::as_str) {
        None => false,
        Some("true") => true,
        Some("false") => false,
        Some(other) => return Err(format!("key 'out_records': expected true/false, got '{other}'")),
    };

    Ok(RunConfig {
        params,
        m,
        bin_width,
        out_records,
        p1,
    })
}
