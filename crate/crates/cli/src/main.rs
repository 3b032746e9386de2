//! Command-line front end: simulate sweeps, fit scaling collapses and run
//! the tabular analyses on the resulting CSV files.

mod analyze;
mod fss;
mod parse;
mod simulate;
mod tables;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "potts-csg", version, about = "Growing-sentence Potts grammar simulator and finite-size-scaling toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a temperature x size (x q) sweep and write CSV tables plus a manifest.
    Simulate(simulate::SimulateArgs),
    /// Fit (T_c, nu, gamma) by scaling collapse of chi_tilde.
    Fss(fss::FssArgs),
    /// Binder crossings, divergence boundary, histograms or rank-frequency tables.
    Analyze(analyze::AnalyzeArgs),
}

/// Why a command stopped. Usage problems exit 2, everything else 1.
pub enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

pub trait Classify<T> {
    fn usage(self) -> Result<T, Failure>;
    fn runtime(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn usage(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Usage(e.into()))
    }
    fn runtime(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Runtime(e.into()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(args) => simulate::run(args),
        Command::Fss(args) => fss::run(args),
        Command::Analyze(args) => analyze::run(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
