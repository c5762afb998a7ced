//! Command-line driver for the toolkit: integrability checks, split-step
//! runs, built-in verification cases, field transforms, and sweeps.
//!
//! Exit codes: 0 when the requested work succeeded (and any verdict passed),
//! 1 when a verification ran to completion and failed, 2 for usage or
//! configuration errors.

mod cmd;
mod field_io;
mod manifest;

use clap::{Parser, Subcommand};

/// Verification toolkit for i u_t + u_xx + F(t) |u|^2 u = 0.
#[derive(Parser)]
#[command(name = "tdnls", version, about, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the singularity-structure test on a coupling formula F(t)
    Painleve(cmd::painleve::PainleveArgs),
    /// Integrate the equation with the split-step spectral scheme
    Simulate(cmd::simulate::SimulateArgs),
    /// Run a built-in consistency check and report pass or fail
    Verify(cmd::verify::VerifyArgs),
    /// Push a sampled field through a symmetry chain
    Transform(cmd::transform::TransformArgs),
    /// Run several subcommands concurrently from one config file
    Sweep(cmd::sweep::SweepArgs),
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Painleve(args) => cmd::painleve::run(args),
        Command::Simulate(args) => cmd::simulate::run(args),
        Command::Verify(args) => cmd::verify::run(args),
        Command::Transform(args) => cmd::transform::run(args),
        Command::Sweep(args) => cmd::sweep::run(args),
    };
    let code = match result {
        Ok(outcome) => {
            for line in &outcome.lines {
                println!("{line}");
            }
            outcome.code
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            2
        }
    };
    std::process::exit(code);
}
