//! File-driven command implementations behind the `stvrla` binary: tabulate
//! one election, plan one audit, or batch-audit a directory. These are plain
//! library functions so the binary stays a thin argument parser.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::ballots::{parse_election, Election, ParseError};
use crate::planner::{plan_audit, AuditParams, PlanKind};
use crate::report::{
    canonical_json, summarize, BatchSummaryRow, InstanceRecord, PlanReport, RoundEventRecord,
};
use crate::tabulation::tabulate;

#[derive(Debug, Error)]
pub enum CommandError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: ParseError,
    },
    #[error("invalid parameters: {0}")]
    BadParams(String),
}

/// Reads and parses an election file, optionally overriding the seat count.
pub fn load_election(path: &Path, seats: Option<u32>) -> Result<Election, CommandError> {
    let content = std::fs::read_to_string(path).map_err(|source| CommandError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let parsed = match seats {
        Some(n) => parse_election(&content, n),
        None => Election::parse(&content),
    };
    parsed.map_err(|source| CommandError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

/// Tabulates an election file and renders either a human-readable round
/// summary or one JSON record per round event.
pub fn run_tabulate(
    path: &Path,
    seats: Option<u32>,
    precision: u32,
    json: bool,
) -> Result<String, CommandError> {
    let election = load_election(path, seats)?;
    let outcome = tabulate(&election, precision);
    if json {
        let mut out = String::new();
        for event in &outcome.rounds {
            out.push_str(&RoundEventRecord::new(event, &election).to_json_line());
            out.push('\n');
        }
        return Ok(out);
    }
    let mut out = String::new();
    let names: Vec<&str> = election.candidates().iter().map(|c| c.name.as_str()).collect();
    writeln!(out, "candidates: {}", names.join(", ")).unwrap();
    writeln!(
        out,
        "seats: {}  quota: {}  ballots: {}",
        election.seats(),
        election.quota(),
        election.total_ballots()
    )
    .unwrap();
    for event in &outcome.rounds {
        let verb = match event.kind {
            crate::tabulation::RoundKind::Elected => "elected",
            crate::tabulation::RoundKind::Eliminated => "eliminated",
        };
        match event.transfer_value {
            Some(tau) => writeln!(
                out,
                "round {}: {} {}  transfer value {}",
                event.round,
                election.candidate_name(event.candidate),
                verb,
                tau.normalize()
            )
            .unwrap(),
            None => writeln!(
                out,
                "round {}: {} {}",
                event.round,
                election.candidate_name(event.candidate),
                verb
            )
            .unwrap(),
        }
        let tallies: Vec<String> = event
            .tallies_before
            .iter()
            .map(|(&c, &t)| format!("{}={}", election.candidate_name(c), t.normalize()))
            .collect();
        writeln!(out, "  {}", tallies.join("  ")).unwrap();
    }
    let winner_names: Vec<&str> = outcome
        .winners
        .iter()
        .map(|&w| election.candidate_name(w))
        .collect();
    writeln!(out, "winners: {}", winner_names.join(", ")).unwrap();
    if outcome.tie_occurred {
        writeln!(out, "note: a tie was broken by candidate order").unwrap();
    }
    Ok(out)
}

/// Plans an audit for one election file and returns the report plus the plan
/// kind (which drives the process exit code).
pub fn run_audit(
    path: &Path,
    seats: Option<u32>,
    params: &AuditParams,
) -> Result<(PlanReport, PlanKind), CommandError> {
    params.validate().map_err(CommandError::BadParams)?;
    let election = load_election(path, seats)?;
    let outcome = tabulate(&election, params.precision);
    let plan = plan_audit(&election, &outcome, params);
    let instance = instance_name(path);
    let report = PlanReport::new(&instance, &election, &outcome, &plan, params);
    Ok((report, plan.kind))
}

/// Canonical JSON rendering of a plan report.
pub fn report_json(report: &PlanReport) -> String {
    canonical_json(report)
}

/// Output of a batch run over a directory of election files.
#[derive(Debug)]
pub struct BatchResult {
    pub records: Vec<InstanceRecord>,
    pub reports: Vec<PlanReport>,
    pub summary: Vec<BatchSummaryRow>,
    /// Files that failed to parse or audit, with the error text.
    pub failures: Vec<(String, String)>,
}

/// Audits every election file (`.txt` or `.json`) in a directory. Instances
/// run in parallel (`jobs = 0` uses all cores, `jobs = 1` is serial) but
/// results are always assembled in file-name order, so output is identical
/// regardless of parallelism.
pub fn run_batch(dir: &Path, params: &AuditParams, jobs: usize) -> Result<BatchResult, CommandError> {
    params.validate().map_err(CommandError::BadParams)?;
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|source| CommandError::Io {
            path: dir.to_path_buf(),
            source,
        })?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && matches!(
                    p.extension().and_then(|e| e.to_str()),
                    Some("txt") | Some("json")
                )
        })
        .collect();
    paths.sort();

    let audit_one = |path: &PathBuf| -> (String, Result<(PlanReport, InstanceRecord), String>) {
        let instance = instance_name(path);
        let result = (|| {
            let election = load_election(path, None).map_err(|e| e.to_string())?;
            let outcome = tabulate(&election, params.precision);
            let plan = plan_audit(&election, &outcome, params);
            let report = PlanReport::new(&instance, &election, &outcome, &plan, params);
            let record = InstanceRecord::new(&instance, &election, &plan);
            Ok((report, record))
        })();
        (instance, result)
    };

    let results: Vec<_> = if jobs == 1 {
        paths.iter().map(audit_one).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| CommandError::BadParams(e.to_string()))?;
        pool.install(|| paths.par_iter().map(audit_one).collect())
    };

    let mut records = Vec::new();
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for (instance, result) in results {
        match result {
            Ok((report, record)) => {
                reports.push(report);
                records.push(record);
            }
            Err(message) => failures.push((instance, message)),
        }
    }
    let summary = summarize(&records);
    Ok(BatchResult {
        records,
        reports,
        summary,
        failures,
    })
}

fn instance_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}
