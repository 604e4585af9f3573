use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;

use commands::{CsvTable, Outcome, RunError};
use config::{Overrides, RunConfig};

/// Numerical checks of the local trace formula and the explicit formula over Q.
///
/// Exit codes: 0 all checks pass, 2 numerical failure, 3 configuration error, 4 data integrity error.
#[derive(Debug, Parser)]
#[command(name = "weiltrace", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Overrides,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact principal-value identities at p = 2, 3, 5, 7, 11 and any --p primes.
    VerifyLocal,
    /// Operator trace against the Weil sum for S = {inf} and S = {inf, p} for each --p.
    VerifyTrace,
    /// Explicit formula for a Gaussian profile; --emit-csv writes residual vs zero count.
    VerifyExplicit,
    /// Poisson summation for a Hermite-Gaussian at --x.
    Poisson,
    /// pi(x) and the ratio pi(x) ln x / x up to --x.
    Pnt,
    /// Compute zeta zeros, or check a zero file against recomputation.
    Zeros {
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        #[arg(long, value_name = "PATH", conflicts_with = "out")]
        check: Option<PathBuf>,
    },
}

fn write_csv(path: &PathBuf, table: &CsvTable) -> Result<(), RunError> {
    let io = |e: csv::Error| RunError::Core(weiltrace_core::Error::Io(e.to_string()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(&table.header).map_err(io)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|v| if v.is_nan() { String::new() } else { v.to_string() })).map_err(io)?;
    }
    w.flush().map_err(|e| RunError::Core(e.into()))
}

fn emit(outcome: &Outcome, cfg: &RunConfig, flags: &Overrides) -> Result<(), RunError> {
    for line in &outcome.summary {
        println!("{line}");
    }
    println!("{}: {}", outcome.command, if outcome.pass { "PASS" } else { "FAIL" });
    if let Some(failure) = &outcome.failure {
        eprintln!("first failure: {failure}");
    }
    if let Some(path) = &flags.emit_json {
        let text = serde_json::to_string_pretty(&outcome.json(cfg)).expect("json");
        std::fs::write(path, text + "\n").map_err(|e| RunError::Core(e.into()))?;
    }
    if let (Some(path), Some(table)) = (&flags.emit_csv, &outcome.csv) {
        write_csv(path, table)?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<bool, RunError> {
    let cfg = RunConfig::resolve(&cli.flags)?;
    let outcome = match &cli.command {
        Command::VerifyLocal => commands::verify_local(&cfg)?,
        Command::VerifyTrace => commands::verify_trace(&cfg)?,
        Command::VerifyExplicit => commands::verify_explicit(&cfg)?,
        Command::Poisson => commands::poisson(&cfg)?,
        Command::Pnt => commands::pnt(&cfg)?,
        Command::Zeros { count, out, check } => commands::zeros(&cfg, *count, out.as_deref(), check.as_deref())?,
    };
    emit(&outcome, &cfg, &cli.flags)?;
    Ok(outcome.pass)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
