//! Form a full audit from IQX assertions alone, without assuming anything
//! about who won on first preferences.
//!
//! ```bash
//! cargo run --example straight_iqx
//! ```

use stvrla::{straight_iqx_audit, tabulate, AuditContext, AuditParams, Election};

fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/table1.txt");
    let content = std::fs::read_to_string(path).expect("bundled data file");
    let election = Election::parse(&content).expect("valid election file");

    let params = AuditParams::default();
    let outcome = tabulate(&election, params.precision);
    let ctx = AuditContext::new(&election, &outcome, &params);

    match straight_iqx_audit(&ctx) {
        Some(plan) => {
            println!(
                "full audit verifying {:?} at expected sample size {}",
                plan.verified_winners
                    .iter()
                    .map(|&w| election.candidate_name(w))
                    .collect::<Vec<_>>(),
                plan.asn.value
            );
            println!("\nassertions:");
            for priced in &plan.assertions {
                println!(
                    "  {:24} margin {:8} sample size {}",
                    priced.assertion.describe(&election),
                    priced.margin.round_dp(4).to_string(),
                    priced.asn.value
                );
            }
        }
        None => println!("no straight IQX audit exists for this contest"),
    }
}
