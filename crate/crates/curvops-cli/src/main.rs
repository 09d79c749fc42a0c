//! Batch front-end for the curvature-operator library.
//!
//! Five subcommands: `selftest` (calibration suite), `cone-test` (membership
//! oracles), `integrate` (reaction ODE), `probe` (tangency / invariance /
//! defect-psd / theorem), `constants` (pinching constants). Commands read a
//! JSON config, write CSV/JSON into the output directory, and embed the
//! resolved config, its hash and the seed in everything they emit. With a
//! fixed seed, outputs are byte-identical across runs.
//!
//! Exit codes: 0 success, 1 check failure, 2 usage or config error.

mod commands;
mod config;
mod formats;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "curvops", version, about = "curvature operator toolbox")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the calibration and identity suite.
    Selftest {
        /// Largest ambient dimension exercised (2..=8).
        #[arg(long, default_value_t = 6)]
        max_n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Test hook: corrupt a named code path to verify failure reporting.
        #[arg(long, hide = true)]
        inject_fault: Option<String>,
    },
    /// Evaluate cone membership for an operator.
    ConeTest {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Integrate the reaction ODE and export the trajectory.
    Integrate {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run tangency / invariance / defect-psd / theorem probes.
    Probe {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Compute pinching constants for (n, A, B).
    Constants {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        n: Option<usize>,
        #[arg(short = 'a', long)]
        a: Option<f64>,
        #[arg(short = 'b', long)]
        b: Option<f64>,
    },
}

fn ensure_out_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path)
        .with_context(|| format!("cannot create output directory {}", path.display()))
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Selftest {
            max_n,
            seed,
            inject_fault,
        } => commands::selftest::run(&commands::selftest::SelftestOptions {
            max_n,
            seed,
            inject_fault,
        }),
        Command::ConeTest { common } => {
            let path = common
                .config
                .as_deref()
                .context("cone-test requires --config")?;
            let mut cfg: config::ConeTestConfig = config::load_config(path)?;
            if let Some(seed) = common.seed {
                cfg.seed = seed;
            }
            if let Some(tol) = common.tol {
                cfg.tol = tol;
            }
            ensure_out_dir(&common.out)?;
            commands::cone_test::run(cfg, &common.out)
        }
        Command::Integrate { common } => {
            let path = common
                .config
                .as_deref()
                .context("integrate requires --config")?;
            let mut cfg: config::IntegrateConfig = config::load_config(path)?;
            if let Some(seed) = common.seed {
                cfg.seed = seed;
            }
            if let Some(tol) = common.tol {
                cfg.tol = tol;
            }
            ensure_out_dir(&common.out)?;
            commands::integrate::run(cfg, &common.out)
        }
        Command::Probe { common } => {
            let path = common
                .config
                .as_deref()
                .context("probe requires --config")?;
            let mut cfg: config::ProbeConfig = config::load_config(path)?;
            if let Some(seed) = common.seed {
                cfg.seed = seed;
            }
            if let Some(tol) = common.tol {
                cfg.tol = tol;
            }
            ensure_out_dir(&common.out)?;
            commands::probe::run(cfg, &common.out)
        }
        Command::Constants { common, n, a, b } => {
            let mut cfg: config::ConstantsConfig = match common.config.as_deref() {
                Some(path) => config::load_config(path)?,
                None => config::ConstantsConfig {
                    schema: config::SCHEMA_VERSION,
                    n: 3,
                    a: 0.1,
                    b: 1.0,
                    grid_points: 1000,
                },
            };
            if let Some(n) = n {
                cfg.n = n;
            }
            if let Some(a) = a {
                cfg.a = a;
            }
            if let Some(b) = b {
                cfg.b = b;
            }
            ensure_out_dir(&common.out)?;
            commands::constants::run(cfg, &common.out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
