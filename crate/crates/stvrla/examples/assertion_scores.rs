//! Build one assertion of each kind over the bundled example and show its
//! aggregate tallies, truth value, and assorter margin.
//!
//! ```bash
//! cargo run --example assertion_scores
//! ```

use std::collections::BTreeSet;
use std::str::FromStr;

use rust_decimal::Decimal;
use stvrla::assertions::{ag_star_tallies, iqx_tally, nl_star_tallies};
use stvrla::{Assertion, Election, TransferBounds};

fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/table1.txt");
    let content = std::fs::read_to_string(path).expect("bundled data file");
    let election = Election::parse(&content).expect("valid election file");
    let id = |name: &str| election.candidate_by_name(name).expect("known candidate");
    let (a, b, c, d) = (id("A"), id("B"), id("C"), id("D"));

    // Assume C was seated on first preferences with its transfer value
    // bounded in [0.39, 0.40].
    let bounds = TransferBounds::new(
        [(c, Decimal::from_str("0.39").unwrap())].into(),
        [(c, Decimal::from_str("0.40").unwrap())].into(),
        stvrla::tau_max(election.seats()),
    )
    .expect("valid bounds");

    let assertions = vec![
        Assertion::iq(c),
        Assertion::ut(c, Decimal::from_str("0.40").unwrap()).unwrap(),
        Assertion::lt(c, Decimal::from_str("0.39").unwrap()).unwrap(),
        Assertion::ag_star(a, d, bounds.clone()).unwrap(),
        Assertion::nl_star(a, d, bounds.clone(), BTreeSet::from([b])).unwrap(),
        Assertion::iqx(a, TransferBounds::empty(), BTreeSet::from([b])).unwrap(),
    ];

    println!("quota: {}\n", election.quota());
    for assertion in &assertions {
        println!("{}", assertion.describe(&election));
        match assertion {
            Assertion::AgStar { winner, loser, bounds } => {
                let (min_t, max_t) = ag_star_tallies(&election, *winner, *loser, bounds);
                println!("  minimum tally {} vs maximum tally {}", min_t, max_t);
            }
            Assertion::NlStar { winner, loser, bounds, eliminated } => {
                let (min_t, max_t) =
                    nl_star_tallies(&election, *winner, *loser, bounds, eliminated);
                println!("  minimum tally {} vs maximum tally {}", min_t, max_t);
            }
            Assertion::Iqx { winner, bounds, eliminated } => {
                let t = iqx_tally(&election, *winner, bounds, eliminated);
                println!("  reachable tally {}", t);
            }
            _ => {}
        }
        println!("  holds on reported ballots: {}", assertion.holds(&election));
        match assertion.to_assorter(&election) {
            Ok(assorter) => println!(
                "  assorter mean {} (margin {})",
                assorter.reported_mean().round_dp(4),
                assorter.margin().round_dp(4)
            ),
            Err(e) => println!("  not convertible: {e}"),
        }
        println!();
    }
}
