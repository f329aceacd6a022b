//! `lrsc`: command-line front end for the closed-form low-rank solvers and
//! the subspace clustering pipeline.
//!
//! Exit codes are part of the interface so scripts can branch on failure
//! modes: 0 success, 1 generic error (bad flags, unreadable files, bad
//! config values), 2 structural assumption violated, 3 exact constraint
//! infeasible, 4 unsupported loss/regularizer pair.

mod bench;
mod commands;
mod verify;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use lrsc_core::Error;

#[derive(Parser)]
#[command(
    name = "lrsc",
    version,
    about = "Closed-form low-rank approximation solvers and subspace clustering"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic union-of-subspaces dataset and write it to disk.
    Synth(commands::SynthArgs),
    /// Run one closed-form solver on matrices loaded from text files.
    Solve(commands::SolveArgs),
    /// Cluster a dataset file and report labels plus accuracy when known.
    Cluster(commands::ClusterArgs),
    /// Sweep methods over corruption levels and lambdas, writing tidy CSVs.
    Bench(bench::BenchArgs),
    /// Re-derive the frozen reference values and compare against them.
    Verify,
}

fn failure_code(err: &Error) -> u8 {
    match err {
        Error::AssumptionViolated { .. } => 2,
        Error::Infeasible { .. } => 3,
        Error::UnsupportedPair { .. } => 4,
        _ => 1,
    }
}

/// Caps the rayon pool when `LRSC_THREADS` is set. Only the CLI touches the
/// global pool; library callers keep whatever pool they already configured.
fn init_thread_pool() -> Result<(), String> {
    let raw = match std::env::var("LRSC_THREADS") {
        Ok(raw) => raw,
        Err(_) => return Ok(()),
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("LRSC_THREADS must be a positive integer, got `{raw}`"))?;
    if n == 0 {
        return Err("LRSC_THREADS must be at least 1".into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| format!("failed to build thread pool: {e}"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    if let Err(msg) = init_thread_pool() {
        eprintln!("error: {msg}");
        return ExitCode::from(1);
    }
    let outcome = match cli.command {
        Command::Synth(args) => commands::run_synth(&args),
        Command::Solve(args) => commands::run_solve(&args),
        Command::Cluster(args) => commands::run_cluster(&args),
        Command::Bench(args) => bench::run(&args),
        Command::Verify => return verify::run(),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(failure_code(&err))
        }
    }
}
