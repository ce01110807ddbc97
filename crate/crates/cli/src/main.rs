use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nonlocal_hj::validate::validate;
use nonlocal_hj::{init_threads, run, Config, Experiment, Result};

#[derive(Parser)]
#[command(name = "nonlocal-hj", version, about = "Nonlocal Hamilton-Jacobi experiments on the periodic torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write summary.json plus CSVs.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// operator-oracle, barrier, regularity, ergodic, ltb, covering, comparison or structure
        #[arg(long)]
        experiment: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check hypotheses and print derived exponents.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn execute(cli: Cli) -> Result<ExitCode> {
    init_threads()?;
    match cli.command {
        Command::Run { config, experiment, out } => {
            let exp: Experiment = experiment.parse()?;
            let cfg = Config::from_path(&config)?;
            let summary = run(&cfg, exp, &out)?;
            for c in &summary.checks {
                println!("{c}");
            }
            Ok(if summary.passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Validate { config } => {
            let cfg = Config::from_path(&config)?;
            let report = validate(&cfg);
            print!("{report}");
            Ok(if report.is_valid() { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
