//! `qsteer` — run steering ensembles from flat config files, validate the
//! simulator against its built-in oracle suite, and sweep parameter axes.

mod config;
mod output;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use qsteer::engine::RecordLevel;
use qsteer::{averaged_curves, histogram, run_ensemble, summarize, CostWeights, TargetSpec};

use config::RunConfig;

#[derive(Parser)]
#[command(name = "qsteer", version, about = "Active-feedback qubit steering simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an ensemble from a config file and write result tables.
    Run(RunArgs),
    /// Check the simulator against its oracle and invariant suites.
    Validate(ValidateArgs),
    /// Re-run a config across an axis of values and tabulate statistics.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Config file path, or a bundled name (bell_n2_fstar99, w_n3_fstar975).
    #[arg(long)]
    config: String,
    /// Override the seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (overrides QSTEER_THREADS; default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Directory for output files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Parse and validate the config, then exit without running.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct ValidateArgs {
    /// Also run the slower ensemble-level checks.
    #[arg(long)]
    full: bool,
    /// Additionally validate this config file or bundled name.
    #[arg(long)]
    config: Option<String>,
    /// Worker threads (overrides QSTEER_THREADS; default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Axis to sweep: f_star, dt, p1, or n.
    #[arg(long)]
    axis: String,
    /// Comma-separated axis values.
    #[arg(long)]
    values: String,
}

/// Errors mapped to the documented exit codes: 2 for configuration
/// problems, 3 for runtime failures.
enum CliError {
    Config(String),
    Runtime(String),
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(CliError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Run(args) => cmd_run(args).map(|()| ExitCode::SUCCESS),
        Command::Validate(args) => cmd_validate(args),
        Command::Sweep(args) => cmd_sweep(args).map(|()| ExitCode::SUCCESS),
    }
}

/// Resolves --config: an existing file wins; otherwise a bundled name.
fn load_config(name: &str) -> Result<RunConfig, CliError> {
    let path = Path::new(name);
    let text = if path.is_file() {
        std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {name}: {e}")))?
    } else if let Some(text) = config::bundled(name) {
        text.to_string()
    } else {
        return Err(CliError::Config(format!(
            "'{name}' is neither a config file nor a bundled config name"
        )));
    };
    config::parse_config(&text).map_err(CliError::Config)
}

/// Thread-count precedence: --threads flag, then QSTEER_THREADS, then the
/// rayon default (all cores).
fn setup_threads(flag: Option<usize>) -> Result<(), CliError> {
    let from_env = match std::env::var("QSTEER_THREADS") {
        Ok(v) => Some(v.parse::<usize>().map_err(|_| {
            CliError::Config(format!("QSTEER_THREADS: cannot parse '{v}' as a thread count"))
        })?),
        Err(_) => None,
    };
    if let Some(n) = flag.or(from_env) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn warn_weak_limit(cfg: &RunConfig) {
    if !cfg.params.weak_limit_ok() {
        let worst = cfg
            .params
            .couplings
            .iter()
            .fold(0.0f64, |acc, j| acc.max(j * cfg.params.dt));
        eprintln!(
            "warning: J*dt = {worst} exceeds the weak-measurement bound 0.5; \
             first-order updates may be inaccurate"
        );
    }
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let mut cfg = load_config(&args.common.config)?;
    if let Some(seed) = args.common.seed {
        cfg.params.seed = seed;
    }
    warn_weak_limit(&cfg);
    if args.common.dry_run {
        println!(
            "config ok: N={}, M={}, bin_width={}, params={:?}",
            cfg.params.n_qubits, cfg.m, cfg.bin_width, cfg.params
        );
        return Ok(());
    }
    setup_threads(args.common.threads)?;
    let out = &args.common.out;
    std::fs::create_dir_all(out)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", out.display())))?;

    let t0 = Instant::now();
    let records = run_ensemble(&cfg.params, cfg.m);
    let wall = t0.elapsed().as_secs_f64();

    let hist = histogram(&records, cfg.bin_width);
    let stats = summarize(&records, cfg.bin_width).ok();
    let summary =
        output::SummaryJson::new(cfg.params.n_qubits, cfg.m, cfg.bin_width, &records, stats.as_ref());
    let io = |e: std::io::Error| CliError::Runtime(format!("write failed: {e}"));
    let mut written = Vec::new();
    output::write_summary(&out.join("summary.json"), &summary).map_err(io)?;
    written.push("summary.json");
    output::write_histogram(&out.join("histogram.csv"), &hist).map_err(io)?;
    written.push("histogram.csv");
    if cfg.params.record >= RecordLevel::Curves {
        let curves = averaged_curves(&records, None)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        output::write_curves(&out.join("curves.csv"), &curves).map_err(io)?;
        written.push("curves.csv");
    }
    if cfg.out_records {
        output::write_records(&out.join("records.csv"), &records).map_err(io)?;
        written.push("records.csv");
    }

    println!(
        "ran M={} trajectories in {wall:.3} s: converged {}/{} (fraction {:.4})",
        cfg.m, summary.converged, cfg.m, summary.converged_fraction
    );
    match &stats {
        Some(s) => println!(
            "N_m = {}, N_s = {}, dN = {} (bin width {})",
            s.mode, s.median, s.half_width, cfg.bin_width
        ),
        None => println!("no trajectory converged within max_steps"),
    }
    println!("wrote {} in {}", written.join(", "), out.display());
    Ok(())
}

fn cmd_validate(args: ValidateArgs) -> Result<ExitCode, CliError> {
    if let Some(name) = &args.config {
        let path = Path::new(name);
        let text = if path.is_file() {
            std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {name}: {e}")))?
        } else if let Some(text) = config::bundled(name) {
            text.to_string()
        } else {
            return Err(CliError::Config(format!(
                "'{name}' is neither a config file nor a bundled config name"
            )));
        };
        let cfg = config::parse_config(&text).map_err(CliError::Config)?;
        warn_weak_limit(&cfg);
        println!("config ok: N={}, M={}", cfg.params.n_qubits, cfg.m);
    }
    setup_threads(args.threads)?;
    let checks = qsteer::checks::run_suite(!args.full);
    let mut failures = 0;
    for check in &checks {
        let status = if check.passed { "PASS" } else { "FAIL" };
        println!("{status}  {} — {}", check.name, check.detail);
        if !check.passed {
            failures += 1;
        }
    }
    if failures > 0 {
        println!("{failures}/{} checks failed", checks.len());
        Ok(ExitCode::FAILURE)
    } else {
        println!("all {} checks passed", checks.len());
        Ok(ExitCode::SUCCESS)
    }
}

/// One sweep axis applied to a base config.
#[derive(Clone, Copy, PartialEq)]
enum Axis {
    FStar,
    Dt,
    P1,
    N,
}

impl Axis {
    fn parse(s: &str) -> Result<Axis, CliError> {
        match s.to_ascii_lowercase().as_str() {
            "f_star" | "fstar" => Ok(Axis::FStar),
            "dt" => Ok(Axis::Dt),
            "p1" => Ok(Axis::P1),
            "n" => Ok(Axis::N),
            other => Err(CliError::Config(format!(
                "unknown sweep axis '{other}' (expected f_star, dt, p1, or n)"
            ))),
        }
    }

    fn label(self) -> &'static str {
        match self {
            Axis::FStar => "f_star",
            Axis::Dt => "dt",
            Axis::P1 => "p1",
            Axis::N => "n",
        }
    }
}

/// Rebuilds the run configuration at one axis value.  N sweeps re-derive
/// the weight ladder and zero-product initial state at the new size, so
/// they only make sense for size-generic targets (GHZ, W).
fn at_axis_value(base: &RunConfig, axis: Axis, value: f64) -> Result<RunConfig, CliError> {
    let mut cfg = base.clone();
    match axis {
        Axis::FStar => cfg.params.f_star = value,
        Axis::Dt => cfg.params.dt = value,
        Axis::P1 => {
            if !(0.0..=1.0).contains(&value) {
                return Err(CliError::Config(format!("p1 value {value} outside [0, 1]")));
            }
            cfg.params.weights = CostWeights::ladder(cfg.params.n_qubits, value);
            cfg.p1 = Some(value);
        }
        Axis::N => {
            if value.fract() != 0.0 || value < 2.0 {
                return Err(CliError::Config(format!(
                    "n values must be integers >= 2, got {value}"
                )));
            }
            let n = value as usize;
            let j = cfg.params.couplings[0];
            if cfg.params.couplings.iter().any(|c| *c != j) {
                return Err(CliError::Config(
                    "n sweeps need uniform couplings".into(),
                ));
            }
            cfg.params.n_qubits = n;
            cfg.params.couplings = vec![j; n];
            cfg.params.weights = CostWeights::ladder(n, base.p1.unwrap_or(0.9));
            cfg.params.initial = TargetSpec::Product(vec![0; n]);
            cfg.params.entropy_cut = None;
            cfg.bin_width = config::default_bin_width(n);
        }
    }
    cfg.params.record = RecordLevel::Summary;
    cfg.params.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(cfg)
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let base = load_config(&args.common.config)?;
    let axis = Axis::parse(&args.axis)?;
    let values: Vec<f64> = args
        .values
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("cannot parse sweep value '{}'", s.trim())))
        })
        .collect::<Result<_, _>>()?;
    if values.is_empty() {
        return Err(CliError::Config("no sweep values given".into()));
    }
    let mut configs = Vec::with_capacity(values.len());
    for &v in &values {
        let mut cfg = at_axis_value(&base, axis, v)?;
        if let Some(seed) = args.common.seed {
            cfg.params.seed = seed;
        }
        warn_weak_limit(&cfg);
        configs.push(cfg);
    }
    if args.common.dry_run {
        println!(
            "sweep ok: axis {} over {:?}, M={} per point",
            axis.label(),
            values,
            base.m
        );
        return Ok(());
    }
    setup_threads(args.common.threads)?;
    std::fs::create_dir_all(&args.common.out).map_err(|e| {
        CliError::Runtime(format!("cannot create {}: {e}", args.common.out.display()))
    })?;

    let mut table = format!("{},n_m,n_s,delta_n,converged_fraction\n", axis.label());
    println!("{:>10}  {:>8}  {:>8}  {:>8}  {:>9}", axis.label(), "N_m", "N_s", "dN", "fraction");
    for (v, cfg) in values.iter().zip(&configs) {
        let t0 = Instant::now();
        let records = run_ensemble(&cfg.params, cfg.m);
        let wall = t0.elapsed().as_secs_f64();
        let stats = summarize(&records, cfg.bin_width).ok();
        let converged = records.iter().filter(|r| r.converged).count();
        let fraction = converged as f64 / cfg.m as f64;
        match &stats {
            Some(s) => {
                writeln!(table, "{v},{},{},{},{fraction}", s.mode, s.median, s.half_width).unwrap();
                println!(
                    "{v:>10}  {:>8}  {:>8}  {:>8}  {fraction:>9.4}   ({wall:.3} s)",
                    s.mode, s.median, s.half_width
                );
            }
            None => {
                writeln!(table, "{v},,,,{fraction}").unwrap();
                println!("{v:>10}  {:>8}  {:>8}  {:>8}  {fraction:>9.4}   ({wall:.3} s)", "-", "-", "-");
            }
        }
    }
    let path = args.common.out.join("sweep.csv");
    std::fs::write(&path, table).map_err(|e| CliError::Runtime(format!("write failed: {e}")))?;
    println!("wrote {}", path.display());
    Ok(())
}
