//! Audit every contest in the bundled corpus and print the per-instance
//! records plus the grouped summary.
//!
//! ```bash
//! cargo run --release --example batch_corpus
//! ```

use std::path::Path;

use stvrla::commands::run_batch;
use stvrla::planner::AuditParams;
use stvrla::report::{records_to_csv, summary_to_csv};

fn main() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data/corpus");
    let params = AuditParams::default();
    let result = run_batch(Path::new(dir), &params, 0).expect("corpus directory exists");

    for (instance, message) in &result.failures {
        eprintln!("failed: {instance}: {message}");
    }
    println!("{}", records_to_csv(&result.records));
    println!("{}", summary_to_csv(&result.summary));
}
