//! `hardy-sharp`: batch sweeps over the sharp Riesz-Fejer verification suite.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod report;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use hardy_sharp::constants::P_GRID;
use hardy_sharp::experiments::{DEFAULT_BUDGET, EPSILON_SWEEP};
use hardy_sharp::quadrature::DEFAULT_TOL;
use hardy_sharp::selftest::SHARPNESS_PS;

use report::Report;

const EXIT_FAILED_CHECK: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_USAGE: u8 = 3;

const THREADS_ENV: &str = "HARDY_SHARP_THREADS";

#[derive(Debug, Parser)]
#[command(name = "hardy-sharp", version)]
#[command(
    about = "Numerical verification of the sharp Riesz-Fejer inequality on harmonic Hardy spaces"
)]
struct Cli {
    /// Single exponent p > 1 (overrides --p-grid).
    #[arg(long, global = true)]
    p: Option<f64>,

    /// Comma-separated exponents.
    #[arg(long, global = true, value_delimiter = ',')]
    p_grid: Option<Vec<f64>>,

    /// Number of interior angles pi k / (n + 1) in the theta grid.
    #[arg(long, global = true, default_value_t = 199)]
    theta_grid: usize,

    /// Absolute quadrature tolerance.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    tol: f64,

    /// Random functions per exponent in ratio-sweep.
    #[arg(long, global = true, default_value_t = 1000)]
    samples: usize,

    /// Degree of random trigonometric polynomials.
    #[arg(long, global = true, default_value_t = 8)]
    degree: usize,

    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Coefficient decay: order-n coefficients are scaled by (1 + n)^-decay.
    #[arg(long, global = true, default_value_t = 1.0)]
    decay: f64,

    /// Ratio evaluations per optimizer run.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    budget: usize,

    /// Optimizer runs per exponent, with seeds seed, seed + 1, ...
    #[arg(long, global = true, default_value_t = 1)]
    restarts: u64,

    /// Comma-separated eps values for epsilon-sweep.
    #[arg(long, global = true, value_delimiter = ',')]
    eps: Option<Vec<f64>>,

    /// Multiplies the Schur constant in `schur`; values below 1 should fail.
    #[arg(long, global = true, default_value_t = 1.0)]
    cp_scale: f64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Subcommand)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Table of K_p, C_p and B_p.
    Constants,
    /// Full proof-chain verification on the theta grid.
    Schur,
    /// F'' from its integral representation against finite differences.
    Convexity,
    /// F at theta = 0 and pi against the closed-form bound.
    Endpoints,
    /// Normalized ratio on random trigonometric polynomials.
    RatioSweep,
    /// Normalized ratio of the near-extremal family.
    EpsilonSweep,
    /// Nelder-Mead search for large normalized ratios.
    Maximize,
    /// The full acceptance battery.
    Selftest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

/// The validated run configuration, echoed into JSON reports.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    command: Command,
    pub p_grid: Vec<f64>,
    pub theta_grid: usize,
    pub tol: f64,
    pub samples: usize,
    pub degree: usize,
    pub seed: u64,
    pub decay: f64,
    pub budget: usize,
    pub restarts: u64,
    pub eps: Vec<f64>,
    pub cp_scale: f64,
    format: Format,
}

impl RunConfig {
    fn from_cli(cli: &Cli) -> Result<Self, String> {
        let default_ps: &[f64] = match cli.command {
            Command::EpsilonSweep | Command::Maximize => &SHARPNESS_PS,
            _ => &P_GRID,
        };
        let p_grid = match (cli.p, &cli.p_grid) {
            (Some(p), _) => vec![p],
            (None, Some(ps)) => ps.clone(),
            (None, None) => default_ps.to_vec(),
        };
        if p_grid.is_empty() {
            return Err("empty p grid".into());
        }
        if let Some(bad) = p_grid.iter().find(|&&p| !(p > 1.0 && p.is_finite())) {
            return Err(format!("p = {bad} is outside 1 < p < inf"));
        }
        if cli.theta_grid < 3 {
            return Err(format!("theta grid size {} is below 3", cli.theta_grid));
        }
        if !(cli.tol > 0.0 && cli.tol.is_finite()) {
            return Err(format!("tol = {} must be positive", cli.tol));
        }
        if cli.samples == 0 {
            return Err("samples must be positive".into());
        }
        if !(cli.decay >= 0.0) {
            return Err(format!("decay = {} must be non-negative", cli.decay));
        }
        if !(cli.cp_scale > 0.0 && cli.cp_scale.is_finite()) {
            return Err(format!("cp-scale = {} must be positive", cli.cp_scale));
        }
        let mut eps = cli.eps.clone().unwrap_or_else(|| EPSILON_SWEEP.to_vec());
        eps.sort_by(|a, b| b.total_cmp(a));
        eps.dedup();
        if cli.command == Command::EpsilonSweep {
            for &p in &p_grid {
                if let Some(bad) = eps.iter().find(|&&e| !(e > 0.0 && e < 1.0 / p)) {
                    return Err(format!("eps = {bad} is outside (0, 1/p) for p = {p}"));
                }
            }
        }
        if cli.command == Command::Maximize {
            if cli.degree < 1 {
                return Err("maximize needs degree >= 1".into());
            }
            if cli.budget < 100 {
                return Err("maximize needs a budget of at least 100".into());
            }
            if cli.restarts == 0 {
                return Err("restarts must be positive".into());
            }
        }
        Ok(RunConfig {
            command: cli.command,
            p_grid,
            theta_grid: cli.theta_grid,
            tol: cli.tol,
            samples: cli.samples,
            degree: cli.degree,
            seed: cli.seed,
            decay: cli.decay,
            budget: cli.budget,
            restarts: cli.restarts,
            eps,
            cp_scale: cli.cp_scale,
            format: cli.format,
        })
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_ENV} = {raw:?} is not a positive integer"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn write_report(config: &RunConfig, report: &Report, path: Option<&PathBuf>) -> io::Result<()> {
    let out: Box<dyn Write> = match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    };
    let mut out = BufWriter::new(out);
    match config.format {
        Format::Csv => report.write_csv(&mut out)?,
        Format::Json => report.write_json(config, &mut out)?,
    }
    out.flush()
}

fn run(config: &RunConfig, output: Option<&PathBuf>) -> ExitCode {
    let report = match config.command {
        Command::Constants => commands::constants(config),
        Command::Schur => commands::schur(config),
        Command::Convexity => commands::convexity(config),
        Command::Endpoints => commands::endpoints(config),
        Command::RatioSweep => commands::ratio_sweep(config),
        Command::EpsilonSweep => commands::epsilon_sweep(config),
        Command::Maximize => commands::maximize(config),
        Command::Selftest => commands::selftest(),
    };
    if let Err(e) = write_report(config, &report, output) {
        eprintln!("error: cannot write report: {e}");
        return ExitCode::from(EXIT_USAGE);
    }
    let s = &report.summary;
    if s.numerical_failures > 0 {
        eprintln!("{} numerical failure(s)", s.numerical_failures);
        ExitCode::from(EXIT_NUMERICAL)
    } else if !s.passed {
        eprintln!("check failed");
        ExitCode::from(EXIT_FAILED_CHECK)
    } else {
        ExitCode::SUCCESS
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let config = match RunConfig::from_cli(&cli) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_USAGE);
    }
    run(&config, cli.output.as_ref())
}
