//! `fracdim`: sample random recursive constructions and estimate their
//! dimensions from the command line.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fracdim::construction::{Address, ConstructionError};
use fracdim::dimension::{CountType, DimensionError, EnvelopeMode};
use fracdim::geometry::GeometryError;
use fracdim::verify::{Fault, Suite};
use thiserror::Error;

use config::CommonArgs;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}", path = .0.display(), source = .1)]
    Io(PathBuf, std::io::Error),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error(transparent)]
    Dimension(#[from] DimensionError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("failed checks: {0:?}")]
    ChecksFailed(Vec<u32>),
}

#[derive(Debug, Parser)]
#[command(name = "fracdim", version, about = "Random recursive constructions and their dimensions")]
struct Cli {
    /// Cap on worker threads; outputs do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SuiteArg {
    Quick,
    Full,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FaultArg {
    None,
    PackingOffByOne,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CountArg {
    Covering,
    Packing,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EnvelopeArg {
    Upper,
    Lower,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for the exponent where the expected sum of ratio powers is 1.
    SolveAlpha {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Box-counting dimension of a sampled level union or of {1/n^p}.
    Boxdim {
        #[command(flatten)]
        common: CommonArgs,
        /// Write the count table (r,N_r,P_r) here.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "covering")]
        count: CountArg,
        #[arg(long, value_enum, default_value = "upper")]
        envelope: EnvelopeArg,
        /// Drop scales where the truncated part raises N_r by this fraction.
        #[arg(long)]
        tail_fraction: Option<f64>,
    },
    /// Box dimension of the one-step orbit of a point under a cell's children.
    OrbitDim {
        #[command(flatten)]
        common: CommonArgs,
        /// Base cell such as 1.2; the root when absent.
        #[arg(long, default_value = "")]
        base: Address,
        /// Point of [0, 1] whose orbit is taken.
        #[arg(long, default_value_t = 1.0)]
        x: f64,
        /// Also take the supremum over all cells up to this level.
        #[arg(long)]
        sup_level: Option<usize>,
        #[arg(long)]
        tail_fraction: Option<f64>,
    },
    /// Sample one realization and write it as JSON.
    Generate {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Solve alpha and estimate the box dimension over independent replicas.
    Experiment {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        tail_fraction: Option<f64>,
    },
    /// Run the built-in verification checks.
    Verify {
        #[arg(long, value_enum, default_value = "quick")]
        suite: SuiteArg,
        /// Defaults to $FRACDIM_SEED, then 0.
        #[arg(long)]
        seed: Option<u64>,
        /// Emit a JSON report instead of text lines.
        #[arg(long)]
        json: bool,
        /// Run a single check by number; repeatable.
        #[arg(long = "check")]
        checks: Vec<u32>,
        #[arg(long, value_enum, default_value = "none", hide = true)]
        fault: FaultArg,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::SolveAlpha { common, tol } => commands::solve_alpha(&config::Settings::resolve(&common)?, tol),
        Command::Boxdim {
            common,
            csv,
            count,
            envelope,
            tail_fraction,
        } => {
            let count = match count {
                CountArg::Covering => CountType::Covering,
                CountArg::Packing => CountType::Packing,
            };
            let envelope = match envelope {
                EnvelopeArg::Upper => EnvelopeMode::Upper,
                EnvelopeArg::Lower => EnvelopeMode::Lower,
            };
            let opts = commands::FitOptions {
                count,
                envelope,
                tail_fraction,
            };
            commands::boxdim(&config::Settings::resolve(&common)?, csv.as_deref(), opts)
        }
        Command::OrbitDim {
            common,
            base,
            x,
            sup_level,
            tail_fraction,
        } => commands::orbit_dim(&config::Settings::resolve(&common)?, &base, x, sup_level, tail_fraction),
        Command::Generate { common } => commands::generate(&config::Settings::resolve(&common)?),
        Command::Experiment {
            common,
            tol,
            tail_fraction,
        } => commands::experiment(&config::Settings::resolve(&common)?, tol, tail_fraction),
        Command::Verify {
            suite,
            seed,
            json,
            checks,
            fault,
        } => {
            let suite = match suite {
                SuiteArg::Quick => Suite::Quick,
                SuiteArg::Full => Suite::Full,
            };
            let fault = match fault {
                FaultArg::None => Fault::None,
                FaultArg::PackingOffByOne => Fault::PackingOffByOne,
            };
            commands::verify(suite, commands::default_seed(seed)?, fault, &checks, json)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
