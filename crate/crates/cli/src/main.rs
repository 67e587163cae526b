//! `archi`: band spectra of periodic quantum graphs on Archimedean tilings.
//!
//! Exit codes: 0 success, 1 verification failure (a tolerance was exceeded)
//! or numeric breakdown, 2 usage/configuration error.

mod commands;
mod config;
mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{EdgeLengthPolicy, FileConfig, Overrides, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Core(#[from] archi_core::Error),
    #[error("{0}")]
    Config(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(archi_core::Error::Numeric(_)) => 1,
            _ => 2,
        }
    }
}

/// Result of a successfully executed command.
pub enum Outcome {
    Pass,
    /// The command ran to completion but a verified quantity exceeded its
    /// tolerance; maps to exit code 1.
    ToleranceExceeded(String),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Configuration file; every key can be overridden by a flag
    #[arg(long)]
    config: Option<PathBuf>,
    /// Tiling name (triangular, elongated-triangular, truncated-square,
    /// trihexagonal, square, hexagonal)
    #[arg(long)]
    tiling: Option<String>,
    /// Potential kind: zero or graphene (richer kinds via the config file)
    #[arg(long)]
    q: Option<String>,
    /// Edge length
    #[arg(long)]
    a: Option<f64>,
    /// Bond length for the graphene potential (defaults to the edge length)
    #[arg(long)]
    bond: Option<f64>,
    /// Upper end of the spectral window
    #[arg(long)]
    lambda_max: Option<f64>,
    /// Quasimomentum grid points per axis
    #[arg(long)]
    theta_grid: Option<usize>,
    /// Spectral-parameter grid points
    #[arg(long)]
    lambda_grid: Option<usize>,
    /// Seed for randomized verification
    #[arg(long)]
    seed: Option<u64>,
    /// Trial count for randomized verification
    #[arg(long)]
    trials: Option<u64>,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format: csv, json, or svg (command-dependent default)
    #[arg(long)]
    format: Option<String>,
}

impl CommonArgs {
    fn resolve(&self, a_policy: EdgeLengthPolicy) -> Result<RunConfig, CliError> {
        let file = match &self.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let overrides = Overrides {
            tiling: self.tiling.clone(),
            q: self.q.clone(),
            a: self.a,
            bond: self.bond,
            lambda_max: self.lambda_max,
            theta_grid: self.theta_grid,
            lambda_grid: self.lambda_grid,
            seed: self.seed,
            trials: self.trials,
            out: self.out.clone(),
            format: self.format.clone(),
        };
        config::resolve(&file, &overrides, a_policy)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "archi",
    version,
    about = "Band spectra of periodic quantum graphs on Archimedean tilings"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Tabulate the fundamental solution pair over a spectral sweep
    Basis {
        #[command(flatten)]
        common: CommonArgs,
        /// Sweep as start:end:count (default 0:lambda-max:lambda-grid)
        #[arg(long)]
        lambda: Option<String>,
    },
    /// Check the characteristic matrix determinant against the closed form
    VerifyChar {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Sweep the dispersion function; report band membership and witnesses
    Dispersion {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Compute spectral bands (table, JSON report, or SVG band diagram)
    Bands {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// List point eigenvalues with their defining residuals
    PointSpectrum {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Tabulate band functions on a quasimomentum grid (CSV/JSON/heatmaps)
    Surface {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Compare the union of fixed-quasimomentum eigenvalues with the bands
    UnionCheck {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Verify Wronskian and half-interval identities over a spectral sweep
    IdentityCheck {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    match &cli.cmd {
        Cmd::Basis { common, lambda } => {
            let cfg = common.resolve(EdgeLengthPolicy::Required)?;
            commands::cmd_basis(&cfg, lambda.as_deref())
        }
        Cmd::VerifyChar { common } => {
            commands::cmd_verify_char(&common.resolve(EdgeLengthPolicy::DefaultOne)?)
        }
        Cmd::Dispersion { common } => {
            commands::cmd_dispersion(&common.resolve(EdgeLengthPolicy::DefaultOne)?)
        }
        Cmd::Bands { common } => {
            commands::cmd_bands(&common.resolve(EdgeLengthPolicy::DefaultOne)?)
        }
        Cmd::PointSpectrum { common } => {
            commands::cmd_point_spectrum(&common.resolve(EdgeLengthPolicy::DefaultOne)?)
        }
        Cmd::Surface { common } => {
            commands::cmd_surface(&common.resolve(EdgeLengthPolicy::DefaultOne)?)
        }
        Cmd::UnionCheck { common } => {
            commands::cmd_union_check(&common.resolve(EdgeLengthPolicy::DefaultOne)?)
        }
        Cmd::IdentityCheck { common } => {
            commands::cmd_identity_check(&common.resolve(EdgeLengthPolicy::DefaultOne)?)
        }
    }
}

fn main() {
    // ARCHI_THREADS caps internal parallelism
    if let Ok(v) = std::env::var("ARCHI_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: ARCHI_THREADS must be a positive integer, got {v:?}");
                std::process::exit(2);
            }
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Pass) => {}
        Ok(Outcome::ToleranceExceeded(msg)) => {
            eprintln!("verification failed: {msg}");
            std::process::exit(1);
        }
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(err.exit_code());
        }
    }
}
