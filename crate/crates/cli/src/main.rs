//! `solq`: run one scenario described by a TOML config and emit CSV/JSON.
//!
//! Exit codes: 0 success, 2 configuration, 3 numerics or measurement,
//! 4 I/O, 5 sweep completed with failed cells.

mod config;
mod output;
mod scenarios;

use std::fmt;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use config::{RunConfig, Scenario};
use output::{Meta, ResolvedMeta};
use solq_core::SolqError;

#[derive(Parser)]
#[command(name = "solq", version, about = "Soliton collision and measurement bench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Temporal and spectral evolution matrices over the fiber
    Evolve(RunArgs),
    /// One collision with band shifts and length scales
    Collide(RunArgs),
    /// Noise ensemble: QND report plus the combined-noise parabola
    Noise(RunArgs),
    /// Transfer coefficients from amplitude-modulated runs
    Transfer(RunArgs),
    /// Cartesian sweep over filter, phase, and velocity-gap axes
    Sweep(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the TOML run configuration
    config: PathBuf,
    /// Directory for emitted files, created if missing
    #[arg(long, default_value = "solq-out")]
    output_dir: PathBuf,
    /// Override the configured ensemble seed
    #[arg(long)]
    seed: Option<u64>,
}

/// Failure classes with distinct exit codes.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config: {msg}"),
            CliError::Numeric(msg) => write!(f, "numeric: {msg}"),
            CliError::Io(msg) => write!(f, "io: {msg}"),
        }
    }
}

impl From<SolqError> for CliError {
    fn from(e: SolqError) -> Self {
        match e {
            SolqError::Config(_) | SolqError::Domain(_) => CliError::Config(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(run(cli));
}

fn run(cli: Cli) -> i32 {
    if let Err(msg) = init_threads() {
        eprintln!("error: config: {msg}");
        return 2;
    }
    let (scenario, args) = match cli.command {
        Command::Evolve(a) => (Scenario::Evolve, a),
        Command::Collide(a) => (Scenario::Collide, a),
        Command::Noise(a) => (Scenario::Noise, a),
        Command::Transfer(a) => (Scenario::Transfer, a),
        Command::Sweep(a) => (Scenario::Sweep, a),
    };
    match drive(scenario, &args) {
        Ok(0) => 0,
        Ok(failed) => {
            eprintln!("sweep finished with {failed} failed cells");
            5
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Honor a thread-count request before any parallel work starts.
fn init_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("SOLQ_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .map_err(|_| format!("SOLQ_THREADS must be a positive integer, got {raw:?}"))?;
    if n == 0 {
        return Err("SOLQ_THREADS must be at least 1".into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn drive(scenario: Scenario, args: &RunArgs) -> Result<usize, CliError> {
    let raw = std::fs::read(&args.config)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", args.config.display())))?;
    let run = RunConfig::resolve(scenario, &raw, args.output_dir.clone(), args.seed)?;

    // Claim the output directory before any compute.
    std::fs::create_dir_all(&run.output_dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", run.output_dir.display())))?;
    let meta_path = run.output_dir.join("meta.json");
    let meta = |resolved: ResolvedMeta, runtime: Option<f64>| Meta {
        scenario: scenario.name().to_string(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        config_sha256: run.config_sha256.clone(),
        seed: run.noise.seed,
        seed_overridden: run.seed_overridden,
        threads: rayon::current_num_threads(),
        resolved,
        runtime_seconds: runtime,
        config: run.file.clone(),
    };
    let placeholder = ResolvedMeta {
        omega_sep: run.omega_sep,
        omega_cut: run.omega_cut,
        fiber_length_meters: run.map.xi_to_meters(run.spec.fiber_length),
        ..ResolvedMeta::default()
    };
    output::write_json(&meta_path, &meta(placeholder, None))?;

    let started = Instant::now();
    let outcome = scenarios::execute(&run)?;
    output::write_json(
        &meta_path,
        &meta(outcome.resolved, Some(started.elapsed().as_secs_f64())),
    )?;
    Ok(outcome.partial_failures)
}
