//! `unisolve`: solve, benchmark and gradient-check linear systems read from
//! files, reporting JSON on stdout.
//!
//! Exit status is 0 on success, 2 when a solve or a gradient check ran but
//! did not succeed, and 1 for usage errors and invalid input. Usage errors
//! go to stderr; every other outcome prints a JSON document.

mod bench;
mod gradcheck;
mod problem;
mod solve;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use unisolve_core::Error;

#[derive(Parser, Debug)]
#[command(name = "unisolve", version, about = "Differentiable linear solves from the command line")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one system and report the solution.
    Solve(solve::SolveArgs),
    /// Time every solver on every problem of a suite.
    Bench(bench::BenchArgs),
    /// Compare derivatives against finite differences and check the
    /// forward/reverse pairing.
    Gradcheck(gradcheck::GradcheckArgs),
}

/// A JSON report and the exit status that goes with it.
pub struct Outcome {
    pub report: Value,
    pub success: bool,
}

fn error_kind(err: &Error) -> &'static str {
    match err {
        Error::Structure(_) => "structure",
        Error::Contract(_) => "contract",
        Error::Evaluation(_) => "evaluation",
        Error::Parse { .. } => "parse",
        Error::Format(_) => "format",
        Error::Io(_) => "io",
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Solve(args) => solve::run(&args),
        Command::Bench(args) => bench::run(&args),
        Command::Gradcheck(args) => gradcheck::run(&args),
    };
    match outcome {
        Ok(Outcome { report, success }) => {
            println!("{}", serde_json::to_string_pretty(&report).expect("reports serialize"));
            if success {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(err) => {
            let report = json!({ "error": err.to_string(), "kind": error_kind(&err) });
            println!("{}", serde_json::to_string_pretty(&report).expect("reports serialize"));
            ExitCode::from(1)
        }
    }
}
