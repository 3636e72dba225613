use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod error;
mod output;

use config::{ExperimentConfig, Overrides};
use error::{CliError, CliResult};

/// Truncated Hilbert transform with overlap: spectra, stability constants and
/// reconstruction experiments.
#[derive(Debug, Parser)]
#[command(name = "ht", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON experiment config; omitted keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Noise seed (overrides `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Geometry (0, 30, 90, 115) with mu in {2, 5, 10}.
    #[arg(long, global = true)]
    small: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// K-, K+, alpha, beta_mu and Hölder exponents per mu.
    Constants,
    /// Spectrum CSV and fit summary.
    SvdReport,
    /// Hölder exponent sweep over a3 for a1 = -1, a2 = 0, a4 = 1.
    Figure1,
    /// Last tail components against the asymptotic models.
    Figure2,
    /// TSVD and Tikhonov reconstructions over delta_list.
    Reconstruct,
    /// Stability bounds over delta_list.
    Bounds,
    /// Invariant checks on the configured instance.
    Validate,
}

fn init_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("HT_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Config(format!("HT_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> CliResult<bool> {
    init_threads()?;
    let overrides = Overrides { out: cli.out, seed: cli.seed, small: cli.small };
    let cfg = ExperimentConfig::load(cli.config.as_deref(), &overrides)?;
    let (report, ok) = match cli.command {
        Command::Constants => (commands::constants(&cfg)?, true),
        Command::SvdReport => (commands::svd_report(&cfg)?, true),
        Command::Figure1 => (commands::figure1(&cfg)?, true),
        Command::Figure2 => (commands::figure2(&cfg)?, true),
        Command::Reconstruct => (commands::reconstruct(&cfg)?, true),
        Command::Bounds => (commands::bounds(&cfg)?, true),
        Command::Validate => commands::validate(&cfg)?,
    };
    print!("{report}");
    Ok(ok)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("validation failed");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
