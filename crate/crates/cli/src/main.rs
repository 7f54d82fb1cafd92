//! `oscmult`: reproducible runs of the spherical-analysis computations.
//!
//! Every run reads a TOML config, writes CSV tables and JSON reports into the
//! output directory, and finishes with `manifest.json` echoing the resolved
//! config and its SHA-256. Exit codes: 0 success, 1 usage error, 2 numerical
//! quality failure (outputs are still written).

mod commands;
mod config;
mod output;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use commands::{GroupMode, Status};
use config::RunConfig;
use output::Run;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numeric(String),
}

impl From<oscmult::Error> for CliError {
    fn from(e: oscmult::Error) -> Self {
        use oscmult::Error::*;
        match e {
            InvalidSpace(_) | Domain(_) | Pole { .. } | StripViolation { .. } | InvalidGroup(_) | NonDiscrete(_) | Io(_)
            | Csv(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

const TRANSFORM_HELP: &str = "\
Examples:
  [space] family = \"RealHyp\", k = 3; [params] function = \"gauss\"
      report.json has roundtrip_rel_err < 1e-6
  config without a [space] block
      exit 1, message names the missing block
  [numerics] tol lowered tenfold
      the quality threshold (100 tol) drops with it: errors stay below it or the run exits 2";

const KERNEL_HELP: &str = "\
Examples:
  H^3, alpha = 3/2, beta = 1
      no point qualifies for the shifted contour: contour_points = 0 in report.json
  alpha = 1, beta = 2 on H^3
      same values as `subordination` with the same eps, to about 1e-15
  beta = 0 with eps = 0
      fails with a tail error: the symbol is not integrable against the Plancherel density";

const DECAY_HELP: &str = "\
Examples:
  H^3, sigma = 1, t in [2, 8]
      stable = true, running sup settles by t = 5, control_growth >= 10
  H^3, sigma = 0.25
      stable = true with a larger sup
  H^3, sigma = 4
      stable = false on [2, 8] (the normalized quantity is still rising there): exit 2";

const L1_HELP: &str = "\
Examples:
  H^3, sigmas 0.02..0.2
      slope close to -1
  H^2, same sigmas
      slope within 0.15 of -1/2
  H^3, sigmas = [2, 3, 4] with t_max = 40
      norms are nonincreasing and stay near 1; exit 2, as the small-sigma law does not apply there";

const SUB_HELP: &str = "\
Examples:
  H^3, alpha = 1, beta = 2, t = 0.5, 1, 2
      rel_diff below 1e-3
  alpha = 1/2, beta = 1
      rel_diff below 1e-3 at the same eps
  beta with Re beta <= 0
      exit 1: the sigma-integral needs Re beta > 0";

const KS_HELP: &str = "\
Examples:
  H^3, alpha = 1/2, beta = 0, p = 2, eta_ratio = 0.5
      converged, meets_order = true (decay at least j^-5)
  same with p = 4, eta_ratio = 0.9
      converged with tail below 1% of the sum
  j_max = 8
      exit 1: at least 15 shells are needed";

const CERTIFY_HELP: &str = "\
Examples:
  alpha = 1/2, p = 4 on H^3, beta just above 3/8
      verdict BoundedCertified; just below: NotCovered
  alpha = 2, p != 2
      verdict L2Only
  alpha = 1, Re beta > 2 |1/p - 1/2|, delta_lt_2rho = true
      verdict BoundedCertified; with both group flags false: NotCovered";

const GROUP_HELP: &str = "\
Examples:
  group poincare, cyclic translation 1.3, x = y = (0, 0, 1)
      sum equals 1 + 2 q (1 - q^L)/(1 - q), q = exp(-1.3 s)
  group delta, preset gamma2 (dim 2), L = 12
      delta_hat within 0.1 of 1
  group quotient, cyclic translation 2, sigma = 1
      |value(L+2) - value(L)| stays below the reported tail_bound";

#[derive(Debug, Subcommand, Clone, Copy)]
enum Command {
    /// Forward and inverse spherical transform of a test function.
    #[command(after_long_help = TRANSFORM_HELP)]
    Transform,
    /// Kernel of the oscillating multiplier on a t-grid.
    #[command(after_long_help = KERNEL_HELP)]
    Kernel,
    /// Stabilization of the normalized damped wave kernel.
    #[command(after_long_help = DECAY_HELP)]
    Decay,
    /// Small-sigma power law of the L1 norm of the damped wave kernel.
    #[command(name = "l1scaling", after_long_help = L1_HELP)]
    L1Scaling,
    /// Direct kernel against its assembly from damped wave kernels.
    #[command(after_long_help = SUB_HELP)]
    Subordination,
    /// Shell integrals of the far kernel.
    #[command(after_long_help = KS_HELP)]
    Ksbound,
    /// Boundedness certificate for (multiplier, p, eta_ratio).
    #[command(after_long_help = CERTIFY_HELP)]
    Certify,
    /// Orbit computations for a free group of isometries.
    #[command(after_long_help = GROUP_HELP)]
    Group {
        #[arg(value_enum)]
        mode: GroupMode,
    },
}

impl Command {
    fn name(&self) -> String {
        match self {
            Command::Transform => "transform".into(),
            Command::Kernel => "kernel".into(),
            Command::Decay => "decay".into(),
            Command::L1Scaling => "l1scaling".into(),
            Command::Subordination => "subordination".into(),
            Command::Ksbound => "ksbound".into(),
            Command::Certify => "certify".into(),
            Command::Group { mode } => format!("group {}", format!("{mode:?}").to_lowercase()),
        }
    }

    fn from_task(task: &str) -> Result<Self, CliError> {
        let words: Vec<&str> = task.split([' ', ':', '.']).filter(|w| !w.is_empty()).collect();
        let args = std::iter::once("oscmult").chain(words.iter().copied());
        TaskOnly::try_parse_from(args).map(|t| t.command).map_err(|_| CliError::Usage(format!("unknown task '{task}'")))
    }
}

#[derive(Debug, Parser)]
struct TaskOnly {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Parser)]
#[command(name = "oscmult", version, about = "Spherical analysis of oscillating multipliers on rank-one symmetric spaces")]
struct Cli {
    /// Command; defaults to `task` from the config.
    #[command(subcommand)]
    command: Option<Command>,
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output` from the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for randomized test points.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

fn execute(cli: Cli) -> Result<Status, CliError> {
    let path = cli.config.ok_or_else(|| CliError::Usage("--config PATH is required".into()))?;
    let mut cfg = RunConfig::load(&path)?;
    let command = match (cli.command, &cfg.task) {
        (Some(c), _) => c,
        (None, Some(t)) => Command::from_task(t)?,
        (None, None) => return Err(CliError::Usage("no command given and the config has no task".into())),
    };
    cfg.task = Some(command.name());
    if let Some(o) = cli.out {
        cfg.output = Some(o);
    }
    let dir = cfg.output.get_or_insert_with(|| PathBuf::from("out")).clone();
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
    }
    let mut run = Run::new(&dir)?;
    let result = match command {
        Command::Transform => commands::transform(&mut cfg, &mut run, cli.seed),
        Command::Kernel => commands::kernel(&mut cfg, &mut run),
        Command::Decay => commands::decay(&mut cfg, &mut run),
        Command::L1Scaling => commands::l1scaling(&mut cfg, &mut run),
        Command::Subordination => commands::subordination(&mut cfg, &mut run),
        Command::Ksbound => commands::ksbound(&mut cfg, &mut run),
        Command::Certify => commands::certify(&mut cfg, &mut run),
        Command::Group { mode } => commands::group(&mut cfg, &mut run, mode),
    };
    let status = match &result {
        Ok(Status::Ok) => "ok".to_string(),
        Ok(Status::Quality(m)) => format!("quality failure: {m}"),
        Err(e) => format!("error: {e}"),
    };
    run.manifest(&command.name(), &cfg, cli.threads, cli.seed, &status)?;
    result
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) {
                e.exit();
            }
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match execute(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Quality(m)) => {
            eprintln!("oscmult: quality failure: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Usage(m)) => {
            eprintln!("oscmult: {m}");
            ExitCode::from(1)
        }
        Err(CliError::Numeric(m)) => {
            eprintln!("oscmult: numerical failure: {m}");
            ExitCode::from(2)
        }
    }
}
