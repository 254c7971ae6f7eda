//! Tabulate the bundled three-seat example and walk through the rounds.
//!
//! ```bash
//! cargo run --example tabulate_election
//! ```

use stvrla::tabulation::RoundKind;
use stvrla::{check_first_winner_criterion, tabulate, Election};

fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/table1.txt");
    let content = std::fs::read_to_string(path).expect("bundled data file");
    let election = Election::parse(&content).expect("valid election file");

    println!(
        "{} candidates, {} seats, {} ballots, quota {}",
        election.num_candidates(),
        election.seats(),
        election.total_ballots(),
        election.quota()
    );

    // Three decimal places reproduces the printed worked example; Scottish
    // counts use five.
    let outcome = tabulate(&election, 3);
    for event in &outcome.rounds {
        let name = election.candidate_name(event.candidate);
        match (event.kind, event.transfer_value) {
            (RoundKind::Elected, Some(tau)) => println!(
                "round {}: {name} elected, surplus transferred at {}",
                event.round,
                tau.normalize()
            ),
            (RoundKind::Elected, None) => println!("round {}: {name} elected", event.round),
            (RoundKind::Eliminated, _) => println!("round {}: {name} eliminated", event.round),
        }
        for (&c, &t) in &event.tallies_before {
            println!("    {:8} {}", election.candidate_name(c), t.normalize());
        }
    }

    let winners: Vec<&str> = outcome
        .winners
        .iter()
        .map(|&w| election.candidate_name(w))
        .collect();
    println!("winners, in order of election: {}", winners.join(", "));
    println!(
        "seated on first preferences: {:?}",
        outcome
            .first_round_winners
            .iter()
            .map(|&w| election.candidate_name(w))
            .collect::<Vec<_>>()
    );
    println!(
        "first-winner criterion satisfied: {}",
        check_first_winner_criterion(&outcome)
    );
    for (&w, &tau) in &outcome.reported_transfer_values {
        println!(
            "reported transfer value for {}: {}",
            election.candidate_name(w),
            tau.normalize()
        );
    }
}
