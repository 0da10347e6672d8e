use std::process::ExitCode;

use clap::{Parser, Subcommand};
use coalition_forge_cli::commands::{
    run_analyze, run_oracle, run_sweep, run_tables, AnalyzeArgs, OracleArgs, SweepArgs, TablesArgs,
};
use coalition_forge_cli::verify::{run_verify, VerifyArgs};
use coalition_forge_cli::Failure;

/// Equilibria of coalition formation in front of an adamant player.
#[derive(Debug, Parser)]
#[command(name = "coalition-forge", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Equilibrium partitions, social optimum and price of anarchy.
    Analyze(AnalyzeArgs),
    /// Check the reference regime tables.
    Tables(TablesArgs),
    /// Analyze a range of eta values.
    Sweep(SweepArgs),
    /// Compare the closed-form bidding equilibrium with a numeric solve.
    Oracle(OracleArgs),
    /// Run the property suite.
    Verify(VerifyArgs),
}

const THREADS_VAR: &str = "COALITION_FORGE_THREADS";

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| {
            Failure::usage(format!(
                "{THREADS_VAR} must be a positive integer, got {value:?}"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::check(format!("cannot start worker pool: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match &cli.command {
        Command::Analyze(args) => run_analyze(args),
        Command::Tables(args) => run_tables(args),
        Command::Sweep(args) => run_sweep(args),
        Command::Oracle(args) => run_oracle(args),
        Command::Verify(args) => run_verify(args),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.code)
        }
    }
}
