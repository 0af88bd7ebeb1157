//! Command-line entry point: parse a config, run the experiment, encode
//! the scientific verdict in the exit status.
//!
//! Exit codes: 0 when the solve converged and the sweep expectation held
//! (descent to offset zero on conforming domains, a violated plane on
//! negative controls); 1 when the run or the expectation failed; 2 for
//! configuration problems.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use navierlab::config::ExperimentConfig;
use navierlab::error::Error;
use navierlab::experiment::{run_experiment, RunOptions};

#[derive(Parser)]
#[command(
    name = "navierlab",
    about = "Solve shifted polyharmonic cascades and verify symmetry by plane descent"
)]
struct Cli {
    /// Experiment configuration file (line-oriented key = value sections).
    #[arg(long)]
    config: PathBuf,

    /// Output directory for report.txt, CSV dumps, and plot data.
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Suppress the stdout copy of the report.
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match ExperimentConfig::from_file(&cli.config) {
        Ok(config) => config,
        Err(err) => {
            eprintln!("navierlab: {}: {}", cli.config.display(), err);
            return ExitCode::from(2);
        }
    };
    let opts = RunOptions {
        out_dir: cli.out,
        quiet: cli.quiet,
    };
    match run_experiment(&config, &opts) {
        Ok(outcome) if outcome.success() => ExitCode::SUCCESS,
        Ok(_) => {
            eprintln!("navierlab: run converged but the expected sweep outcome failed");
            ExitCode::from(1)
        }
        Err(err @ Error::Config { .. }) => {
            eprintln!("navierlab: {}", err);
            ExitCode::from(2)
        }
        Err(err) => {
            eprintln!("navierlab: {}", err);
            ExitCode::from(1)
        }
    }
}
