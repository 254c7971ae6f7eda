//! Run the dual-loop strategy on a contest where one winner cannot be
//! verified, producing a partial audit.
//!
//! ```bash
//! cargo run --example dual_loop
//! ```

use stvrla::{dual_loop_audit, plan_audit, tabulate, AuditContext, AuditParams, Election};

fn main() {
    let path = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/data/corpus/t4_three_of_four.txt"
    );
    let content = std::fs::read_to_string(path).expect("bundled data file");
    let election = Election::parse(&content).expect("valid election file");

    let params = AuditParams::default();
    let outcome = tabulate(&election, params.precision);
    println!(
        "winners: {:?}  (on first preferences: {:?})",
        outcome
            .winners
            .iter()
            .map(|&w| election.candidate_name(w))
            .collect::<Vec<_>>(),
        outcome
            .first_round_winners
            .iter()
            .map(|&w| election.candidate_name(w))
            .collect::<Vec<_>>(),
    );

    let ctx = AuditContext::new(&election, &outcome, &params);
    let plan = dual_loop_audit(&ctx);
    println!(
        "\ndual-loop result: {:?} audit verifying {:?}, expected sample size {}",
        plan.kind,
        plan.verified_winners
            .iter()
            .map(|&w| election.candidate_name(w))
            .collect::<Vec<_>>(),
        plan.asn.value
    );
    for priced in &plan.assertions {
        println!(
            "  {:24} margin {:8} sample size {}",
            priced.assertion.describe(&election),
            priced.margin.round_dp(4).to_string(),
            priced.asn.value
        );
    }

    // The planner runs both strategies and keeps the better result.
    let chosen = plan_audit(&election, &outcome, &params);
    println!(
        "\nplanner selection: {:?} via {:?}, verifying {} of {} winners",
        chosen.kind,
        chosen.strategy,
        chosen.verified_winners.len(),
        outcome.winners.len()
    );
}
