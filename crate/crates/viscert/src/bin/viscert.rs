//! Thin command-line wrapper over the library: config in, CSVs and reports
//! out. See the crate examples for library-level usage.

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use viscert::cli::{self, Estimator};
use viscert::config::RunConfig;

#[derive(Parser)]
#[command(
    name = "viscert",
    about = "Certify failure probabilities of candidate viable initial sets",
    version
)]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the config output directory.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Override the config worker count.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn the failure-prone set and write the GP artifacts.
    Explore {
        /// Override the GP query budget.
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Certify the failure probability and write report.txt.
    Certify {
        /// is | mc | both
        #[arg(long, default_value = "is")]
        estimator: String,
    },
    /// Compare estimator convergence over a sample-size ladder.
    Convergence {
        /// Comma-separated increasing sample counts, e.g. 1000,10000,...
        #[arg(long)]
        ladder: String,
    },
    /// Dump a single trajectory as CSV.
    Simulate {
        /// Comma-separated initial condition (default: candidate center).
        #[arg(long, allow_hyphen_values = true)]
        theta: Option<String>,
    },
}

fn run(cli: Cli) -> viscert::Result<()> {
    let config_path = cli.config.ok_or_else(|| {
        viscert::Error::Config("--config PATH is required (JSON run configuration)".into())
    })?;
    let mut cfg = RunConfig::from_path(&config_path)?;
    if let Some(seed) = cli.seed {
        cfg.certify.seed = seed;
    }
    if let Some(dir) = cli.output_dir {
        cfg.output_dir = dir;
    }
    if let Some(workers) = cli.workers {
        cfg.workers = workers;
    }
    match cli.command {
        Command::Explore { budget } => {
            if let Some(b) = budget {
                cfg.gp.budget = b;
            }
            cli::cmd_explore(&cfg)
        }
        Command::Certify { estimator } => cli::cmd_certify(&cfg, estimator.parse::<Estimator>()?),
        Command::Convergence { ladder } => {
            let ladder = cli::parse_ladder(&ladder)?;
            cli::cmd_convergence(&cfg, &ladder)
        }
        Command::Simulate { theta } => {
            let theta = theta.map(|t| cli::parse_theta(&t)).transpose()?;
            cli::cmd_simulate(&cfg, theta)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            let mut source = std::error::Error::source(&err);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
