//! `sturm`: analyze, solve and verify `-y'' + q y = f` on the real line.
//!
//! Exit codes: 0 success, 1 runtime failure or failed checks, 2 the coefficient
//! fails the tail hypothesis, 3 inconclusive analysis, 4 solvers disagree,
//! 64 usage errors.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;
use sturm_core::otelbaev::DEFAULT_ROOT_TOL;

use config::{Defaults, FileConfig, RunConfig};

pub const EXIT_USAGE: u8 = 64;
pub const EXIT_RUNTIME: u8 = 1;

#[derive(Debug)]
pub struct UsageError(pub String);

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<UsageError> for CliError {
    fn from(e: UsageError) -> Self {
        Self::Usage(e.0)
    }
}

impl From<sturm_core::Error> for CliError {
    fn from(e: sturm_core::Error) -> Self {
        match e {
            sturm_core::Error::InvalidArgument(_) | sturm_core::Error::Parse(_) => Self::Usage(e.to_string()),
            other => Self::Runtime(other.into()),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        Self::Runtime(e)
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "sturm",
    version,
    about = "Correct-solvability analysis and solvers for -y'' + q y = f on the real line"
)]
struct Cli {
    /// JSON file with default values for any flag (flags take precedence)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Shared {
    /// Coefficient spec, e.g. `constant:1`, `example17:0.5`, `example18:1.5,1` or a JSON object
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    p: Option<f64>,
    /// Interval as `lo:hi`
    #[arg(long, allow_hyphen_values = true)]
    domain: Option<String>,
    /// Number of grid points (profiles) or integration steps (solvers)
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    root_tol: Option<f64>,
    #[arg(long)]
    wronskian_tol: Option<f64>,
    /// Use adaptive quadrature with this absolute tolerance for window integrals
    #[arg(long)]
    quad_tol: Option<f64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Otelbaev profile and correct-solvability verdict
    Analyze {
        #[command(flatten)]
        shared: Shared,
        /// Window half-widths for m(a), comma separated
        #[arg(long, value_delimiter = ',')]
        a: Option<Vec<f64>>,
    },
    /// Solve with the Green's-function and finite-difference paths and compare them
    Solve {
        #[command(flatten)]
        shared: Shared,
        /// Forcing spec; repeat for several (`gaussian:c,w`, `expabs:s`, `bump:c,r`, `zero`)
        #[arg(long = "f", allow_hyphen_values = true)]
        f: Vec<String>,
        /// Largest accepted sup-norm deviation between the two solvers
        #[arg(long)]
        deviation_tol: Option<f64>,
        /// Solve even when the tail hypothesis fails
        #[arg(long)]
        force: bool,
        /// Add eight forcings drawn from this seed
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Test-function bounds at a sweep of centers
    Verify {
        #[command(flatten)]
        shared: Shared,
        /// Number of sweep centers spread over the domain
        #[arg(long)]
        centers: Option<usize>,
    },
    /// Rerun the oscillating (1.7) or spiked (1.8) coefficient study
    Reproduce {
        /// `1.7` or `1.8`
        #[arg(long)]
        example: Option<String>,
        #[arg(long, value_delimiter = ',')]
        theta: Option<Vec<f64>>,
        /// Right ends of the nested ranges for 1.7, comma separated
        #[arg(long, value_delimiter = ',')]
        extents: Option<Vec<f64>>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

const DEFAULT_OUT: &str = "sturm-out";

fn resolve(shared: Shared, file: &FileConfig, defaults: Defaults) -> Result<RunConfig, CliError> {
    let q = match (shared.q, &file.q) {
        (Some(s), _) => config::parse_coefficient(&Value::String(s))?,
        (None, Some(v)) => config::parse_coefficient(v)?,
        (None, None) => return Err(CliError::Usage("missing --q coefficient spec".into())),
    };
    let domain = match (shared.domain, &file.domain) {
        (Some(s), _) => config::parse_domain(&s)?,
        (None, Some(v)) => config::domain_value(v)?,
        (None, None) => defaults.domain,
    };
    let forcings = match &file.f {
        Some(list) => list.iter().map(config::parse_forcing).collect::<Result<_, _>>()?,
        None => Vec::new(),
    };
    let run = RunConfig {
        coefficient: q,
        forcings,
        p: shared.p.or(file.p).unwrap_or(defaults.p),
        domain,
        n_points: shared.n.or(file.n).unwrap_or(defaults.n),
        a_list: file.a.clone().unwrap_or_else(|| vec![1.0]),
        root_tol: shared.root_tol.or(file.root_tol).unwrap_or(DEFAULT_ROOT_TOL),
        wronskian_tol: shared.wronskian_tol.or(file.wronskian_tol).unwrap_or(config::DEFAULT_WRONSKIAN_TOL),
        quad_abs_tol: shared.quad_tol.or(file.quad_tol),
        deviation_tol: file.deviation_tol.unwrap_or(config::DEFAULT_DEVIATION_TOL),
        centers: file.centers.unwrap_or(config::DEFAULT_CENTERS),
        force: file.force.unwrap_or(false),
        seed: file.seed,
        out: shared.out.or_else(|| file.out.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
    };
    Ok(run)
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let file = FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Analyze { shared, a } => {
            let mut cfg = resolve(shared, &file, Defaults { domain: (-10.0, 10.0), n: 1001, p: 2.0 })?;
            if let Some(a) = a {
                cfg.a_list = a;
            }
            cfg.validate()?;
            commands::analyze(&cfg)
        }
        Command::Solve { shared, f, deviation_tol, force, seed } => {
            let mut cfg = resolve(shared, &file, Defaults { domain: (-15.0, 15.0), n: 6000, p: 2.0 })?;
            if !f.is_empty() {
                cfg.forcings =
                    f.into_iter().map(|s| config::parse_forcing(&Value::String(s))).collect::<Result<_, _>>()?;
            }
            cfg.deviation_tol = deviation_tol.unwrap_or(cfg.deviation_tol);
            cfg.force |= force;
            cfg.seed = seed.or(cfg.seed);
            cfg.validate()?;
            commands::solve(&cfg)
        }
        Command::Verify { shared, centers } => {
            let mut cfg = resolve(shared, &file, Defaults { domain: (-10.0, 10.0), n: 1001, p: 2.0 })?;
            cfg.centers = centers.unwrap_or(cfg.centers);
            if cfg.centers == 0 {
                return Err(CliError::Usage("centers must be positive".into()));
            }
            cfg.validate()?;
            commands::verify(&cfg)
        }
        Command::Reproduce { example, theta, extents, alpha, beta, p, out } => {
            let req = commands::ReproduceRequest {
                example: example
                    .or_else(|| file.example.clone())
                    .ok_or_else(|| CliError::Usage("missing --example (1.7 or 1.8)".into()))?,
                thetas: theta.or_else(|| file.theta.clone()),
                extents: extents.or_else(|| file.extents.clone()),
                alpha: alpha.or(file.alpha),
                beta: beta.or(file.beta),
                p: p.or(file.p),
                out: out.or_else(|| file.out.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
            };
            commands::reproduce(&req)
        }
    }
}

fn configure_workers() {
    if let Some(n) = std::env::var("STURM_WORKERS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    configure_workers();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
