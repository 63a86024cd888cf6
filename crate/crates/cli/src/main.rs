//! Command-line harness for the collapse-measurement simulator: parameter
//! loading, reproducible ensembles, streaming statistics, and file outputs.
//!
//! Every Monte Carlo subcommand takes a mandatory `--seed`; reruns with the
//! same arguments produce byte-identical outputs regardless of the worker
//! count.  The process exits 0 only when every in-run invariant assertion
//! passed; the assertions are echoed under `"checks"` in the JSON summary.

mod analytic;
mod ansatz;
mod config;
mod gamma;
mod oracle;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use output::Check;

#[derive(Debug, Parser)]
#[command(
    name = "qmupl",
    version,
    about = "Simulator for a mass-proportional position-collapse model of a spin measurement"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form constants, time scales, and bounds at the physical scale
    AnalyticReport(analytic::Args),
    /// Monte Carlo of a single measured branch's Gaussian peak
    Eigenstate(ansatz::EigenArgs),
    /// Monte Carlo of the two-branch state through collapse
    Superposition(ansatz::SuperArgs),
    /// First-passage Monte Carlo of the reduced weight-gap diffusion
    ReducedGamma(gamma::Args),
    /// Direct lattice integration of the full dynamics
    GridOracle(oracle::OracleArgs),
    /// Shared-noise comparison of the peak ansatz against the lattice solver
    Compare(oracle::CompareArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::AnalyticReport(args) => analytic::run(args),
        Command::Eigenstate(args) => ansatz::run_eigenstate(args),
        Command::Superposition(args) => ansatz::run_superposition(args),
        Command::ReducedGamma(args) => gamma::run(args),
        Command::GridOracle(args) => oracle::run_oracle(args),
        Command::Compare(args) => oracle::run_compare(args),
    };
    match result {
        Ok(checks) => report_checks(&checks),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn report_checks(checks: &[Check]) -> ExitCode {
    let failed: Vec<&Check> = checks.iter().filter(|c| !c.ok).collect();
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        for check in failed {
            eprintln!("invariant failed: {}: {}", check.name, check.detail);
        }
        ExitCode::FAILURE
    }
}
