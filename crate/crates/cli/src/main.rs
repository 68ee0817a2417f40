use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sabi_cli::config::load_config;
use sabi_cli::error::{CliError, CliResult};
use sabi_cli::run::{resume, run, RunOutcome};
use sabi_cli::verify::{run_suite, VerifyOptions, SUITES};

/// Born–Infeld, Maxwell and MHD field simulations with stochastic transport.
///
/// Exit codes: 0 success, 1 I/O failure, 2 configuration error,
/// 3 numerical failure, 4 acceptance failure.
#[derive(Parser, Debug)]
#[command(name = "sabi", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the simulation described by a JSON configuration file.
    Run { config: PathBuf },
    /// Run a verification suite (or `all`) and report pass or fail.
    Verify {
        suite: String,
        /// Grid points per axis, overriding the suite's default.
        #[arg(long)]
        grid: Option<usize>,
        /// Time step (the coarsest one in refinement studies).
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Continue a run from a checkpoint directory.
    Resume { checkpoint: PathBuf },
}

fn report(o: &RunOutcome) {
    println!(
        "completed {} steps for {} member(s); output in {}",
        o.steps,
        o.finals.len(),
        o.output.display()
    );
}

fn execute(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run { config } => report(&run(&load_config(&config)?)?),
        Command::Resume { checkpoint } => report(&resume(&checkpoint)?),
        Command::Verify { suite, grid, dt } => {
            if suite != "all" && !SUITES.contains(&suite.as_str()) {
                return Err(CliError::Config(format!(
                    "unknown suite {suite:?}; expected one of {} or all",
                    SUITES.join(", ")
                )));
            }
            let names: Vec<&str> = if suite == "all" { SUITES.to_vec() } else { vec![suite.as_str()] };
            let mut failed = Vec::new();
            for name in names {
                for check in run_suite(name, &VerifyOptions { grid, dt })? {
                    println!("{check}");
                    if !check.passed {
                        failed.push(check.name);
                    }
                }
            }
            if !failed.is_empty() {
                return Err(CliError::Acceptance(failed.join(", ")));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sabi: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
