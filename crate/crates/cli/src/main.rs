//! Command-line front end for the 2D homogenization toolkit.
//!
//! `homog2d <subcommand> --config <path> [--strict] [--out <path>] [...]`
//!
//! Exit codes: 0 success, 1 usage/config error (strict admissibility
//! failures included), 2 indefinite periodic form detected, 3 iterative
//! solver non-convergence, 4 ill-posed laminate problem.

use std::process::ExitCode;

use clap::{error::ErrorKind, Parser, Subcommand};

mod commands;
mod config;
mod report;

#[derive(Parser)]
#[command(
    name = "homog2d",
    version,
    about = "Periodic homogenization and strong-ellipticity analysis for two-phase 2D elasticity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the periodic cell problem and assemble the homogenized tensor.
    Homogenize(commands::HomogenizeArgs),
    /// Estimate the periodic Rayleigh quotient, sample Bloch forms and run
    /// the comparison certificate.
    Coercivity(commands::CoercivityArgs),
    /// Decompose the null-Lagrangian-shifted energy density into quadratic
    /// forms and compute the coercivity constant.
    Decompose(commands::DecomposeArgs),
    /// Evaluate the exact laminate formula, optionally sweeping the volume
    /// fraction.
    Laminate(commands::LaminateArgs),
    /// Rank-one ellipticity analysis of a stored tensor.
    Ellipticity(commands::EllipticityArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let result = match &cli.command {
        Command::Homogenize(args) => commands::homogenize(args),
        Command::Coercivity(args) => commands::coercivity(args),
        Command::Decompose(args) => commands::decompose(args),
        Command::Laminate(args) => commands::laminate(args),
        Command::Ellipticity(args) => commands::ellipticity(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
