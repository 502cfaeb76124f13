//! Command implementations behind the `tdoa` binary.

pub mod output;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use tdoa_core::montecarlo::{
    log_grid, run_sweep, run_sweep_with_threads, sample_scenario, ExperimentConfig,
};
use tdoa_core::scenario_file::ScenarioFile;
use tdoa_core::{locate, Error, LocalizationResult};

/// Process exit codes. Stable across releases.
pub mod exit {
    pub const OK: u8 = 0;
    pub const IO: u8 = 1;
    /// Command-line usage errors (reported by clap).
    pub const USAGE: u8 = 2;
    pub const PARSE_ERROR: u8 = 3;
    pub const SINGULAR_MATRIX: u8 = 4;
    pub const NO_REAL_SOLUTION: u8 = 5;
    pub const INVALID_CONFIG: u8 = 6;
    /// Any other solver failure: degenerate deltas, degenerate linear
    /// quadratic, no admissible root, inconsistent deltas.
    pub const SOLVER_FAILURE: u8 = 7;
}

#[derive(Debug, Parser)]
#[command(
    name = "tdoa",
    version,
    about = "Exact closed-form TDOA source localization for 4 and 5 sensors"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Localize a source from a scenario file.
    Locate(LocateArgs),
    /// Run noise-free Monte Carlo success-fraction sweeps.
    Sweep(SweepArgs),
    /// Draw a random scenario file with a truth source.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct LocateArgs {
    /// Scenario file (TOML).
    pub scenario: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    pub format: ReportFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 5)]
    pub sensors: usize,
    #[arg(long, default_value_t = 1000)]
    pub instances: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Explicit source scales, comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        conflicts_with = "scale_range"
    )]
    pub scales: Option<Vec<f64>>,
    /// Log-spaced scales as `lo,hi,count`.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub scale_range: Option<Vec<f64>>,
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        default_value = "1e-6,1e-3"
    )]
    pub thresholds: Vec<f64>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: TableFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to all cores. Results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, default_value_t = 5)]
    pub sensors: usize,
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A failed command: exit code plus message.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::new(exit::IO, format!("{}: {e}", path.display()))
}

fn emit(out: Option<&Path>, body: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, body).map_err(|e| io_failure(path, e)),
        None => std::io::stdout()
            .write_all(body.as_bytes())
            .map_err(|e| Failure::new(exit::IO, format!("stdout: {e}"))),
    }
}

/// Exit code and a message naming the solver stage that failed.
pub fn solver_failure(err: &Error, n_sensors: usize) -> Failure {
    let (code, stage) = match err {
        Error::SingularMatrix { .. } if n_sensors == 5 => (
            exit::SINGULAR_MATRIX,
            "solving the five-sensor linear system B r_S = x",
        ),
        Error::SingularMatrix { .. } => (
            exit::SINGULAR_MATRIX,
            "solving C xi = z and C eta = y (four-sensor system)",
        ),
        Error::DegenerateDeltas { .. } => (exit::SOLVER_FAILURE, "assembling the rows of B"),
        Error::NoRealSolution { .. } => (exit::NO_REAL_SOLUTION, "solving the rho_1 quadratic"),
        Error::DegenerateLinear => (exit::SOLVER_FAILURE, "solving the rho_1 quadratic"),
        Error::NoCandidates => (exit::SOLVER_FAILURE, "selecting a rho_1 root"),
        Error::InvalidDeltas(_) => (exit::SOLVER_FAILURE, "checking range differences"),
        Error::Parse(_) | Error::InvalidArray(_) | Error::InvalidScenario(_) => {
            (exit::PARSE_ERROR, "reading the scenario")
        }
        Error::InvalidConfig(_) | Error::DegenerateSampling { .. } => {
            (exit::INVALID_CONFIG, "configuring the experiment")
        }
    };
    Failure::new(code, format!("{stage}: {err}"))
}

fn fmt_vec(v: tdoa_core::Vec3) -> String {
    format!("[{}, {}, {}]", v.x, v.y, v.z)
}

fn text_report(r: &LocalizationResult, truth_error: Option<f64>) -> String {
    let mut s = String::new();
    s.push_str(&format!("position: {}\n", fmt_vec(r.position)));
    s.push_str(&format!("method: {:?}\n", r.method));
    s.push_str(&format!(
        "ambiguity: {:?}{}\n",
        r.ambiguity_resolved_by,
        if r.ambiguous {
            " (tied residuals, first root kept)"
        } else {
            ""
        }
    ));
    s.push_str("candidates:\n");
    for (i, c) in r.candidates.iter().enumerate() {
        s.push_str(&format!(
            "  {} rho1={} position={} residual={:e}\n",
            if i == r.selected { "*" } else { " " },
            c.rho1,
            fmt_vec(c.position),
            c.residual
        ));
    }
    let p = &r.diagnostics.pivots;
    s.push_str(&format!(
        "pivots: [{:e}, {:e}, {:e}] ratio={:e}\n",
        p.pivots[0], p.pivots[1], p.pivots[2], p.pivot_ratio
    ));
    if let (Some(pairings), Some(scaled)) = (r.diagnostics.pairings, r.diagnostics.scaled_rows) {
        s.push_str(&format!(
            "pairings: {pairings:?} cleared rows: {scaled:?}\n"
        ));
    }
    if r.diagnostics.linear_fallback {
        s.push_str("rho_1 equation solved as linear\n");
    }
    if let Some(e) = truth_error {
        s.push_str(&format!("relative error vs truth: {e:e}\n"));
    }
    s
}

pub fn cmd_locate(args: &LocateArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&args.scenario).map_err(|e| io_failure(&args.scenario, e))?;
    let input = ScenarioFile::from_toml_str(&text)
        .and_then(ScenarioFile::into_input)
        .map_err(|e| {
            Failure::new(
                exit::PARSE_ERROR,
                format!("{}: {e}", args.scenario.display()),
            )
        })?;
    let n = input.sensors.len();
    let result = locate(&input.sensors, &input.deltas).map_err(|e| solver_failure(&e, n))?;
    let truth_error = input.truth.map(|t| (result.position - t).norm() / t.norm());

    let body = match args.format {
        ReportFormat::Text => text_report(&result, truth_error),
        ReportFormat::Json => {
            let doc = json!({ "result": result, "truth_relative_error": truth_error });
            serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
        }
    };
    emit(args.out.as_deref(), &body)
}

pub fn sweep_config(args: &SweepArgs) -> Result<ExperimentConfig, Failure> {
    let invalid = |m: String| Failure::new(exit::INVALID_CONFIG, m);
    let scale_grid = match (&args.scales, &args.scale_range) {
        (Some(s), _) => s.clone(),
        (None, Some(r)) => match r.as_slice() {
            &[lo, hi, count] if count >= 1.0 && count.fract() == 0.0 && lo > 0.0 && hi > 0.0 => {
                log_grid(lo, hi, count as usize)
            }
            _ => {
                return Err(invalid(format!(
                    "--scale-range expects lo,hi,count with positive bounds, got {r:?}"
                )))
            }
        },
        (None, None) => ExperimentConfig::default().scale_grid,
    };
    let cfg = ExperimentConfig {
        n_instances: args.instances,
        n_sensors: args.sensors,
        thresholds: args.thresholds.clone(),
        seed: args.seed,
        scale_grid,
    };
    cfg.validate().map_err(|e| invalid(e.to_string()))?;
    if args.threads == Some(0) {
        return Err(invalid("--threads must be at least 1".into()));
    }
    Ok(cfg)
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<(), Failure> {
    let cfg = sweep_config(args)?;
    let summary = match args.threads {
        Some(t) => run_sweep_with_threads(&cfg, t),
        None => run_sweep(&cfg),
    }
    .map_err(|e| solver_failure(&e, cfg.n_sensors))?;
    let body = match args.format {
        TableFormat::Csv => {
            output::to_csv(&summary).map_err(|e| Failure::new(exit::IO, e.to_string()))?
        }
        TableFormat::Json => serde_json::to_string_pretty(&summary).expect("serializable") + "\n",
    };
    emit(args.out.as_deref(), &body)
}

pub fn cmd_gen(args: &GenArgs) -> Result<(), Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let scenario = sample_scenario(&mut rng, args.sensors, args.scale)
        .map_err(|e| Failure::new(exit::INVALID_CONFIG, e.to_string()))?;
    let body = ScenarioFile::from_scenario(&scenario)
        .to_toml_string()
        .map_err(|e| Failure::new(exit::IO, e.to_string()))?;
    emit(args.out.as_deref(), &body)
}

pub fn run(cli: &Cli) -> ExitCode {
    let outcome = match &cli.command {
        Command::Locate(a) => cmd_locate(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Gen(a) => cmd_gen(a),
    };
    match outcome {
        Ok(()) => ExitCode::from(exit::OK),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solver_errors_map_to_stable_codes() {
        let singular = Error::SingularMatrix {
            pivot: 0.0,
            threshold: 1e-12,
        };
        assert_eq!(solver_failure(&singular, 5).code, exit::SINGULAR_MATRIX);
        assert!(solver_failure(&singular, 4).message.contains("C xi = z"));
        let no_root = Error::NoRealSolution { discriminant: -1.0 };
        assert_eq!(solver_failure(&no_root, 4).code, exit::NO_REAL_SOLUTION);
        assert!(solver_failure(&no_root, 4)
            .message
            .contains("rho_1 quadratic"));
        assert_eq!(
            solver_failure(&Error::Parse("x".into()), 4).code,
            exit::PARSE_ERROR
        );
        assert_eq!(
            solver_failure(&Error::NoCandidates, 4).code,
            exit::SOLVER_FAILURE
        );
        assert_eq!(
            solver_failure(&Error::DegenerateDeltas { k: 3, j: 2 }, 5).code,
            exit::SOLVER_FAILURE
        );
    }

    #[test]
    fn unknown_flags_are_rejected() {
        assert!(Cli::try_parse_from(["tdoa", "locate", "x.toml", "--frobnicate"]).is_err());
        assert!(
            Cli::try_parse_from(["tdoa", "sweep", "--scales", "1", "--scale-range", "1,2,3"])
                .is_err()
        );
    }
}
