//! Price an assertion: watch the martingale p-value fall as supportive
//! ballots are drawn, then estimate the expected sample size by simulation.
//!
//! ```bash
//! cargo run --example sample_size
//! ```

use rust_decimal::prelude::ToPrimitive;
use stvrla::{alpha_martingale, estimate_asn, AsnParams, Assertion, Election, TransferBounds};

fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/table1.txt");
    let content = std::fs::read_to_string(path).expect("bundled data file");
    let election = Election::parse(&content).expect("valid election file");
    let id = |name: &str| election.candidate_by_name(name).expect("known candidate");

    let assertion = Assertion::ag_star(id("C"), id("B"), TransferBounds::empty()).unwrap();
    let assorter = assertion.to_assorter(&election).expect("positive margin");
    println!("assertion: {}", assertion.describe(&election));
    println!(
        "reported mean {}, margin {}",
        assorter.reported_mean().round_dp(4),
        assorter.margin().round_dp(4)
    );

    // Feed the martingale a perfectly supportive sample stream: every draw
    // carries the maximum normalized score.
    let params = AsnParams::default();
    let u = assorter.upper_bound().to_f64().unwrap();
    let eta0 = assorter.reported_mean().to_f64().unwrap();
    let samples = vec![u; 60];
    let p_values = alpha_martingale(
        &samples,
        u,
        election.total_ballots(),
        eta0,
        &params,
    )
    .expect("samples in range");
    for (i, p) in p_values.iter().enumerate().step_by(10) {
        println!("after {:3} unanimous draws: p = {p:.6}", i + 1);
    }

    // Simulated estimate with overstatements injected at the configured rate.
    let estimate = estimate_asn(&assorter, &election, &params);
    println!(
        "\nestimated sample size over {} repetitions (error rate {}): {}",
        params.reps, params.error_rate, estimate.value
    );
    println!(
        "per repetition: {:?}",
        estimate
            .per_rep
            .iter()
            .map(|r| r.map(|n| n.to_string()).unwrap_or_else(|| "-".into()))
            .collect::<Vec<_>>()
    );
}
