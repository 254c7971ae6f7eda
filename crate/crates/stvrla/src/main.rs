//! Thin command-line wrapper around the library: `tabulate`, `audit`, and
//! `batch`. Every flag can also be set through an `STVRLA_`-prefixed
//! environment variable.
//!
//! Exit codes for `audit`: 0 when a full audit was formed, 3 for a partial
//! audit, 4 when no audit is possible; 2 signals bad input or bad flags.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rust_decimal::Decimal;

use stvrla::commands::{report_json, run_audit, run_batch, run_tabulate};
use stvrla::planner::{AuditParams, PlanKind};
use stvrla::report::{records_to_csv, summary_to_csv};
use stvrla::risk::AsnParams;

#[derive(Parser)]
#[command(name = "stvrla", version, about = "Plan risk-limiting audits for STV elections")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct AuditFlags {
    /// Override the seat count from the ballot file
    #[arg(long, env = "STVRLA_SEATS")]
    seats: Option<u32>,
    /// Risk limit for each assertion test
    #[arg(long, env = "STVRLA_RISK_LIMIT", default_value_t = 0.05)]
    risk_limit: f64,
    /// Expected overstatement rate per sampled ballot
    #[arg(long, env = "STVRLA_ERROR_RATE", default_value_t = 0.002)]
    error_rate: f64,
    /// Simulation repetitions per assertion
    #[arg(long, env = "STVRLA_REPS", default_value_t = 20)]
    reps: u32,
    /// Neighbourhood step for transfer-value bounds
    #[arg(long, env = "STVRLA_DELTA", default_value = "0.005")]
    delta: Decimal,
    /// Largest sample size considered auditable
    #[arg(long, env = "STVRLA_MAX_ASN", default_value_t = 2500)]
    max_asn: u64,
    /// Base seed for the simulation streams
    #[arg(long, env = "STVRLA_SEED", default_value_t = 1)]
    seed: u64,
    /// Decimal places for transfer values and ballot weights
    #[arg(long, env = "STVRLA_PRECISION", default_value_t = 5)]
    precision: u32,
}

impl AuditFlags {
    fn to_params(&self) -> AuditParams {
        AuditParams {
            risk: AsnParams {
                risk_limit: self.risk_limit,
                error_rate: self.error_rate,
                reps: self.reps,
                seed: self.seed,
                max_sample: self.max_asn,
                ..AsnParams::default()
            },
            delta: self.delta,
            precision: self.precision,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate an election and print the round-by-round trace
    Tabulate {
        /// Ballot file (canonical text or JSON mirror)
        path: PathBuf,
        /// Override the seat count from the ballot file
        #[arg(long, env = "STVRLA_SEATS")]
        seats: Option<u32>,
        /// Decimal places for transfer values and ballot weights
        #[arg(long, env = "STVRLA_PRECISION", default_value_t = 5)]
        precision: u32,
        /// Emit one JSON record per round event instead of text
        #[arg(long, env = "STVRLA_JSON")]
        json: bool,
    },
    /// Plan an audit for one election and print the plan report as JSON
    Audit {
        /// Ballot file (canonical text or JSON mirror)
        path: PathBuf,
        #[command(flatten)]
        flags: AuditFlags,
        /// Write the report here instead of standard output
        #[arg(long, env = "STVRLA_OUT")]
        out: Option<PathBuf>,
    },
    /// Audit every election file in a directory and summarize the results
    Batch {
        /// Directory of ballot files (.txt or .json)
        dir: PathBuf,
        #[command(flatten)]
        flags: AuditFlags,
        /// Write the per-instance CSV here instead of standard output
        #[arg(long, env = "STVRLA_OUT")]
        out: Option<PathBuf>,
        /// Write the summary CSV here instead of standard output
        #[arg(long, env = "STVRLA_SUMMARY")]
        summary: Option<PathBuf>,
        /// Worker threads (0 = all cores, 1 = serial)
        #[arg(long, env = "STVRLA_JOBS", default_value_t = 0)]
        jobs: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Tabulate { path, seats, precision, json } => {
            let out =
                run_tabulate(&path, seats, precision, json).map_err(|e| e.to_string())?;
            print!("{out}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Audit { path, flags, out } => {
            let params = flags.to_params();
            let (report, kind) =
                run_audit(&path, flags.seats, &params).map_err(|e| e.to_string())?;
            let rendered = report_json(&report);
            match out {
                Some(out_path) => {
                    std::fs::write(&out_path, rendered)
                        .map_err(|e| format!("{}: {e}", out_path.display()))?;
                }
                None => print!("{rendered}"),
            }
            Ok(match kind {
                PlanKind::Full => ExitCode::SUCCESS,
                PlanKind::Partial => ExitCode::from(3),
                PlanKind::None => ExitCode::from(4),
            })
        }
        Command::Batch { dir, flags, out, summary, jobs } => {
            let params = flags.to_params();
            let result = run_batch(&dir, &params, jobs).map_err(|e| e.to_string())?;
            for (instance, message) in &result.failures {
                eprintln!("warning: {instance}: {message}");
            }
            let csv = records_to_csv(&result.records);
            match out {
                Some(path) => std::fs::write(&path, csv)
                    .map_err(|e| format!("{}: {e}", path.display()))?,
                None => print!("{csv}"),
            }
            let summary_csv = summary_to_csv(&result.summary);
            match summary {
                Some(path) => std::fs::write(&path, summary_csv)
                    .map_err(|e| format!("{}: {e}", path.display()))?,
                None => print!("{summary_csv}"),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
