//! Command-line harness: generate matrices, run the solvers, reproduce the
//! reference experiments and compare against the QR oracle.
//!
//! Exit statuses: 0 success, 1 usage or validation error, 2 no convergence,
//! 3 breakdown or dominance tie, 4 I/O error, 5 experiment bound failed.

mod experiment;
mod generate;
mod plot;
mod solve;
mod spectrum;
mod trace;

use std::process::ExitCode;

use anyhow::Context;
use biortho::SolverError;
use clap::{Parser, Subcommand};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_NO_CONVERGENCE: u8 = 2;
pub const EXIT_BREAKDOWN: u8 = 3;
pub const EXIT_IO: u8 = 4;
pub const EXIT_BOUNDS: u8 = 5;

/// Environment variable that takes precedence over `--seed`.
pub const SEED_ENV: &str = "BIORTHO_SEED";

#[derive(Parser)]
#[command(
    name = "biortho",
    version,
    about = "Dense non-Hermitian eigensolvers: biorthogonal flow and power iteration"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a matrix and its metadata (`<name>.meta.json`).
    Generate(generate::Args),
    /// Run one solver on a matrix file; writes a JSON-lines trace and a result file.
    Solve(solve::Args),
    /// Run a reference experiment end to end and write a report.
    Experiment(experiment::Args),
    /// Full spectrum with left and right eigenvectors from the QR oracle.
    Oracle(spectrum::Args),
    /// SVG of the eigenvalue estimate and residual along a trace.
    Plot(plot::Args),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_FAILURE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Generate(args) => generate::run(&args),
        Command::Solve(args) => solve::run(&args),
        Command::Experiment(args) => experiment::run(&args),
        Command::Oracle(args) => spectrum::run(&args),
        Command::Plot(args) => plot::run(&args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(error_code(&e))
        }
    }
}

fn error_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.is::<biortho::io::IoError>() || cause.is::<std::io::Error>() {
            return EXIT_IO;
        }
        if let Some(
            SolverError::SingularShift { .. } | SolverError::DeflatedAway | SolverError::SpaceExhausted,
        ) = cause.downcast_ref::<SolverError>()
        {
            return EXIT_BREAKDOWN;
        }
    }
    EXIT_FAILURE
}

/// `BIORTHO_SEED` if set, else the flag value.
pub fn resolve_seed(flag: u64) -> anyhow::Result<u64> {
    resolve_seed_from(flag, std::env::var(SEED_ENV).ok().as_deref())
}

fn resolve_seed_from(flag: u64, env: Option<&str>) -> anyhow::Result<u64> {
    match env {
        Some(s) => s.trim().parse().with_context(|| format!("{SEED_ENV}={s:?} is not an unsigned integer")),
        None => Ok(flag),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn env_seed_overrides_flag() {
        assert_eq!(resolve_seed_from(3, None).unwrap(), 3);
        assert_eq!(resolve_seed_from(3, Some(" 17 ")).unwrap(), 17);
        assert!(resolve_seed_from(3, Some("x")).is_err());
    }

    #[test]
    fn error_codes() {
        let io = anyhow::Error::new(std::io::Error::other("disk"));
        assert_eq!(error_code(&io), EXIT_IO);
        let shift =
            anyhow::Error::new(SolverError::SingularShift { re: 0.0, im: 0.0, index: 1 }).context("solve");
        assert_eq!(error_code(&shift), EXIT_BREAKDOWN);
        assert_eq!(error_code(&anyhow::anyhow!("bad flag")), EXIT_FAILURE);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
