//! Command-line front end: simulate transmission spectra, coil sweeps,
//! genetic-algorithm fits, wirebond circuit analysis, and tuning-model
//! calibration, all from JSON configs with deterministic file outputs.

mod commands;
mod error;
mod schema;
mod si;

use clap::{Args, Parser, Subcommand};
use commands::Ctx;
use error::CliError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "cmtio", version, about = "Coupled-mode transmission simulation and fitting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Override the config's random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Print progress to stderr.
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand)]
enum Command {
    /// Transmission spectrum over a frequency grid plus the hybridized-mode table.
    Simulate(RunArgs),
    /// |S21| map over (coil current, frequency), as CSV and a PGM heatmap.
    Sweep(RunArgs),
    /// Joint multi-cut genetic-algorithm fit with optional sweep reconstruction.
    Fit(RunArgs),
    /// Wirebond-integration circuit model: coupling and frequency shift vs length.
    Circuit(RunArgs),
    /// Calibrate the kinetic-inductance tuning model from (current, frequency) points.
    Tune(RunArgs),
}

fn run(command: &Command) -> Result<(), CliError> {
    let (args, f): (&RunArgs, fn(&Ctx) -> Result<(), CliError>) = match command {
        Command::Simulate(a) => (a, commands::simulate),
        Command::Sweep(a) => (a, commands::sweep),
        Command::Fit(a) => (a, commands::fit_cmd),
        Command::Circuit(a) => (a, commands::circuit_cmd),
        Command::Tune(a) => (a, commands::tune),
    };
    let ctx = Ctx::new(&args.config, &args.out, args.seed, args.verbose)?;
    f(&ctx)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
