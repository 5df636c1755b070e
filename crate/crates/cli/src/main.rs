use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use delaywave::{execute, Command, Options};

/// Wave equation with delayed boundary velocity feedback.
#[derive(Debug, Parser)]
#[command(name = "delaywave", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; defaults to stdout (or `output` in [run] for simulate).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Run even when the admissibility conditions fail.
    #[arg(long = "unsafe", global = true)]
    allow_unsafe: bool,
    /// Seed for randomized checks, recorded in every output.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for sweeps.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    workers: u64,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Validate parameters and print the derived weights.
    CheckParams,
    /// Integrate the closed loop and write the functional time series.
    Simulate,
    /// Eigenvalues of the deflated generator.
    Spectrum,
    /// Resolvent norms along the imaginary axis.
    ResolventSweep,
    /// Batch of runs over the [sweep] parameter grid.
    Sweep,
    /// Fit exponential and logarithmic decay to the basic energy.
    FitDecay {
        /// Time series CSV; simulates from --config when omitted.
        input: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(delaywave::error::EXIT_VALIDATION) } else { ExitCode::SUCCESS };
        }
    };
    let opts = Options {
        config: cli.config,
        out: cli.out,
        allow_unsafe: cli.allow_unsafe,
        seed: cli.seed,
        workers: cli.workers as usize,
    };
    let cmd = match cli.command {
        Cmd::CheckParams => Command::CheckParams,
        Cmd::Simulate => Command::Simulate,
        Cmd::Spectrum => Command::Spectrum,
        Cmd::ResolventSweep => Command::ResolventSweep,
        Cmd::Sweep => Command::Sweep,
        Cmd::FitDecay { input } => Command::FitDecay { input },
    };
    match execute(&cmd, &opts) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
