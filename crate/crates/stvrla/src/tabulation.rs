//! Weighted Inclusive Gregory STV tabulation.
//!
//! Produces the reported outcome an audit plan verifies: winners in election
//! order, first-round winners, reported transfer values, and a round-by-round
//! event log. One candidate is elected or eliminated per round; surplus
//! transfers multiply every ballot in the pile by the (truncated) transfer
//! value and pass it to the next preference that is neither elected,
//! eliminated, nor holding a quota at the start of the round. A candidate who
//! reaches a quota mid-transfer keeps receiving until the transfer completes.

use std::collections::{BTreeMap, BTreeSet};

use rust_decimal::Decimal;
use serde::Serialize;

use crate::ballots::{first_excluding, BallotWeight, CandidateId, Election};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RoundKind {
    Elected,
    Eliminated,
}

/// One election or elimination, with the standing tallies at the start of
/// the round. `transfer_value` is present exactly when a surplus was
/// re-weighted and passed on (zero-surplus transfers carry `Some(0)`);
/// final-round fills carry `None`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundEvent {
    pub round: u32,
    pub kind: RoundKind,
    pub candidate: CandidateId,
    pub transfer_value: Option<Decimal>,
    pub tallies_before: BTreeMap<CandidateId, Decimal>,
    /// Total value passed to continuing candidates by this round's transfer.
    pub distributed: Option<Decimal>,
    /// Total value leaving the count because no eligible preference remained.
    pub exhausted: Option<Decimal>,
    /// Number of ballot papers in the transferred pile.
    pub transferred_ballots: Option<u64>,
}

/// The reported result of a tabulation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TabulationOutcome {
    /// Winners in the order they were elected.
    pub winners: Vec<CandidateId>,
    pub losers: BTreeSet<CandidateId>,
    /// Winners whose first-preference tally already met the quota.
    pub first_round_winners: BTreeSet<CandidateId>,
    /// Reported transfer value for each first-round winner, derived from
    /// first-preference tallies and truncated to the tabulation precision.
    pub reported_transfer_values: BTreeMap<CandidateId, Decimal>,
    pub rounds: Vec<RoundEvent>,
    /// Set when any election or elimination choice was decided by the
    /// lowest-index tie rule; callers may refuse to audit such outcomes.
    pub tie_occurred: bool,
    /// Decimal places used for transfer values and ballot weights.
    pub precision: u32,
}

impl TabulationOutcome {
    pub fn num_winners(&self) -> usize {
        self.winners.len()
    }

    pub fn is_winner(&self, c: CandidateId) -> bool {
        self.winners.contains(&c)
    }
}

/// True when at least one candidate was seated on first preferences.
pub fn check_first_winner_criterion(outcome: &TabulationOutcome) -> bool {
    !outcome.first_round_winners.is_empty()
}

/// Tabulates an election at the given weight precision (decimal places for
/// transfer values and re-weighted ballots; Scottish counting uses 5).
pub fn tabulate(election: &Election, precision: u32) -> TabulationOutcome {
    let quota = Decimal::from(election.quota());
    let num_candidates = election.num_candidates();
    let seats = election.seats() as usize;

    // Piles hold (ranking type index, current weight) entries.
    let mut piles: Vec<Vec<(usize, BallotWeight)>> = vec![Vec::new(); num_candidates];
    let mut tallies: Vec<Decimal> = vec![Decimal::ZERO; num_candidates];
    for (t, ballot) in election.ballots().iter().enumerate() {
        let c = ballot.prefs[0].index();
        piles[c].push((t, BallotWeight::one()));
        tallies[c] += Decimal::from(ballot.count);
    }

    let first_round_winners: BTreeSet<CandidateId> = election
        .candidate_ids()
        .filter(|c| tallies[c.index()] >= quota)
        .collect();
    let reported_transfer_values: BTreeMap<CandidateId, Decimal> = first_round_winners
        .iter()
        .map(|&w| {
            let t = tallies[w.index()];
            ((t - quota) / t).trunc_with_scale(precision)
        })
        .zip(first_round_winners.iter().copied())
        .map(|(tau, w)| (w, tau))
        .collect();

    let mut winners: Vec<CandidateId> = Vec::new();
    let mut eliminated: BTreeSet<CandidateId> = BTreeSet::new();
    let mut rounds: Vec<RoundEvent> = Vec::new();
    let mut tie_occurred = false;
    let mut round = 0u32;

    loop {
        if winners.len() == seats {
            break;
        }
        round += 1;
        let standing: Vec<CandidateId> = election
            .candidate_ids()
            .filter(|c| !winners.contains(c) && !eliminated.contains(c))
            .collect();
        let snapshot: BTreeMap<CandidateId, Decimal> = standing
            .iter()
            .map(|&c| (c, tallies[c.index()].normalize()))
            .collect();

        if standing.len() == seats - winners.len() {
            // Remaining candidates fill the remaining seats, highest tally first.
            let mut fill = standing.clone();
            fill.sort_by(|&a, &b| {
                tallies[b.index()]
                    .cmp(&tallies[a.index()])
                    .then(a.cmp(&b))
            });
            for pair in fill.windows(2) {
                if tallies[pair[0].index()] == tallies[pair[1].index()] {
                    tie_occurred = true;
                }
            }
            for c in fill {
                rounds.push(RoundEvent {
                    round,
                    kind: RoundKind::Elected,
                    candidate: c,
                    transfer_value: None,
                    tallies_before: snapshot.clone(),
                    distributed: None,
                    exhausted: None,
                    transferred_ballots: None,
                });
                winners.push(c);
            }
            break;
        }

        // Receiver eligibility is fixed at the start of the round: a
        // candidate holding a quota now cannot receive this round's transfer.
        let quota_holders: BTreeSet<CandidateId> = standing
            .iter()
            .copied()
            .filter(|c| tallies[c.index()] >= quota)
            .collect();
        let mut ineligible: BTreeSet<CandidateId> = election
            .candidate_ids()
            .filter(|c| winners.contains(c) || eliminated.contains(c))
            .collect();
        ineligible.extend(quota_holders.iter().copied());

        if !quota_holders.is_empty() {
            // Elect the quota holder with the highest tally.
            let elect = *quota_holders
                .iter()
                .max_by(|&&a, &&b| {
                    tallies[a.index()]
                        .cmp(&tallies[b.index()])
                        .then(b.cmp(&a))
                })
                .expect("non-empty");
            if quota_holders
                .iter()
                .any(|&c| c != elect && tallies[c.index()] == tallies[elect.index()])
            {
                tie_occurred = true;
            }

            // Filling the last seat ends the count; the winner's surplus is
            // never distributed.
            if winners.len() + 1 == seats {
                rounds.push(RoundEvent {
                    round,
                    kind: RoundKind::Elected,
                    candidate: elect,
                    transfer_value: None,
                    tallies_before: snapshot,
                    distributed: None,
                    exhausted: None,
                    transferred_ballots: None,
                });
                winners.push(elect);
                break;
            }

            let tally = tallies[elect.index()];
            let tau = ((tally - quota) / tally).trunc_with_scale(precision);
            let pile = std::mem::take(&mut piles[elect.index()]);
            let transferred_ballots: u64 = pile
                .iter()
                .map(|&(t, _)| election.ballots()[t].count)
                .sum();
            let mut distributed = Decimal::ZERO;
            let mut exhausted = Decimal::ZERO;
            for (t, weight) in pile {
                let new_weight = weight.scaled(tau, precision);
                if new_weight.is_zero() {
                    continue;
                }
                let ballot = &election.ballots()[t];
                let value = Decimal::from(ballot.count) * new_weight.value();
                match first_excluding(&ballot.prefs, &ineligible) {
                    Some(next) => {
                        piles[next.index()].push((t, new_weight));
                        tallies[next.index()] += value;
                        distributed += value;
                    }
                    None => exhausted += value,
                }
            }
            tallies[elect.index()] = Decimal::ZERO;
            rounds.push(RoundEvent {
                round,
                kind: RoundKind::Elected,
                candidate: elect,
                transfer_value: Some(tau),
                tallies_before: snapshot,
                distributed: Some(distributed.normalize()),
                exhausted: Some(exhausted.normalize()),
                transferred_ballots: Some(transferred_ballots),
            });
            winners.push(elect);
        } else {
            // Nobody has a quota: eliminate the lowest tally.
            let elim = *standing
                .iter()
                .min_by(|&&a, &&b| {
                    tallies[a.index()]
                        .cmp(&tallies[b.index()])
                        .then(a.cmp(&b))
                })
                .expect("non-empty");
            if standing
                .iter()
                .any(|&c| c != elim && tallies[c.index()] == tallies[elim.index()])
            {
                tie_occurred = true;
            }

            let pile = std::mem::take(&mut piles[elim.index()]);
            let transferred_ballots: u64 = pile
                .iter()
                .map(|&(t, _)| election.ballots()[t].count)
                .sum();
            ineligible.insert(elim);
            let mut distributed = Decimal::ZERO;
            let mut exhausted = Decimal::ZERO;
            for (t, weight) in pile {
                if weight.is_zero() {
                    continue;
                }
                let ballot = &election.ballots()[t];
                let value = Decimal::from(ballot.count) * weight.value();
                match first_excluding(&ballot.prefs, &ineligible) {
                    Some(next) => {
                        piles[next.index()].push((t, weight));
                        tallies[next.index()] += value;
                        distributed += value;
                    }
                    None => exhausted += value,
                }
            }
            tallies[elim.index()] = Decimal::ZERO;
            rounds.push(RoundEvent {
                round,
                kind: RoundKind::Eliminated,
                candidate: elim,
                transfer_value: None,
                tallies_before: snapshot,
                distributed: Some(distributed.normalize()),
                exhausted: Some(exhausted.normalize()),
                transferred_ballots: Some(transferred_ballots),
            });
            eliminated.insert(elim);
        }
    }

    let losers: BTreeSet<CandidateId> = election
        .candidate_ids()
        .filter(|c| !winners.contains(c))
        .collect();

    TabulationOutcome {
        winners,
        losers,
        first_round_winners,
        reported_transfer_values,
        rounds,
        tie_occurred,
        precision,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ballots::tau_max;
    use proptest::prelude::*;
    use std::str::FromStr;

    const TABLE1: &str = "\
candidates: A,B,C,D,E
seats: 3
250 : A
120 : B,A,C
400 : C,D
350 : E
110 : C,E,D
";

    fn dec(s: &str) -> Decimal {
        Decimal::from_str(s).unwrap()
    }

    fn by_name(e: &Election, name: &str) -> CandidateId {
        e.candidate_by_name(name).unwrap()
    }

    #[test]
    fn three_seat_worked_example_at_precision_3() {
        let e = Election::parse(TABLE1).unwrap();
        let outcome = tabulate(&e, 3);
        let (a, b, c, d, ee) = (
            by_name(&e, "A"),
            by_name(&e, "B"),
            by_name(&e, "C"),
            by_name(&e, "D"),
            by_name(&e, "E"),
        );

        assert_eq!(e.quota(), 308);
        assert_eq!(outcome.winners, vec![c, ee, a]);
        assert_eq!(outcome.losers, [b, d].into_iter().collect());
        assert!(!outcome.tie_occurred);
        assert_eq!(outcome.rounds.len(), 4);

        // Round 1: C elected at 510 with transfer value 0.396.
        let r1 = &outcome.rounds[0];
        assert_eq!((r1.kind, r1.candidate), (RoundKind::Elected, c));
        assert_eq!(r1.transfer_value, Some(dec("0.396")));
        assert_eq!(
            r1.tallies_before,
            [
                (a, dec("250")),
                (b, dec("120")),
                (c, dec("510")),
                (d, dec("0")),
                (ee, dec("350")),
            ]
            .into_iter()
            .collect()
        );
        // 400 ballots worth 158.4 plus 110 worth 43.56 flow to D, skipping E.
        assert_eq!(r1.distributed, Some(dec("201.96")));
        assert_eq!(r1.exhausted, Some(dec("0")));

        // Round 2: E elected with transfer value 0.12 and full exhaustion.
        let r2 = &outcome.rounds[1];
        assert_eq!((r2.kind, r2.candidate), (RoundKind::Elected, ee));
        assert_eq!(r2.transfer_value, Some(dec("0.12")));
        assert_eq!(r2.tallies_before[&d], dec("201.96"));
        assert_eq!(r2.distributed, Some(dec("0")));
        assert_eq!(r2.exhausted, Some(dec("42")));

        // Round 3: B eliminated, 120 ballots flow to A at full value.
        let r3 = &outcome.rounds[2];
        assert_eq!((r3.kind, r3.candidate), (RoundKind::Eliminated, b));
        assert_eq!(r3.distributed, Some(dec("120")));

        // Round 4: A elected with 370, filling the last seat; no transfer.
        let r4 = &outcome.rounds[3];
        assert_eq!((r4.kind, r4.candidate), (RoundKind::Elected, a));
        assert_eq!(r4.tallies_before[&a], dec("370"));
        assert_eq!(r4.transfer_value, None);

        // First-round winners and their reported transfer values.
        assert_eq!(outcome.first_round_winners, [c, ee].into_iter().collect());
        assert_eq!(outcome.reported_transfer_values[&c], dec("0.396"));
        assert_eq!(outcome.reported_transfer_values[&ee], dec("0.12"));
        assert!(check_first_winner_criterion(&outcome));
    }

    #[test]
    fn one_seat_majority() {
        let content = "candidates: A,B\nseats: 1\n2 : A\n1 : B\n";
        let e = Election::parse(content).unwrap();
        let outcome = tabulate(&e, 5);
        assert_eq!(e.quota(), 2);
        assert_eq!(outcome.winners, vec![by_name(&e, "A")]);
        assert_eq!(outcome.rounds.len(), 1);
        assert!(check_first_winner_criterion(&outcome));
    }

    #[test]
    fn remaining_candidates_fill_unclaimed_seats() {
        // Three candidates, two seats, nine ballots: quota 4, everyone at 3.
        // A is eliminated on the lowest-index tie rule, then B and C remain
        // for the two unfilled seats and are elected in descending tally order.
        let content = "candidates: A,B,C\nseats: 2\n3 : A,B\n3 : B,C\n3 : C,A\n";
        let e = Election::parse(content).unwrap();
        let outcome = tabulate(&e, 5);
        let (a, b, c) = (by_name(&e, "A"), by_name(&e, "B"), by_name(&e, "C"));
        assert_eq!(e.quota(), 4);
        assert_eq!(outcome.rounds[0].kind, RoundKind::Eliminated);
        assert_eq!(outcome.rounds[0].candidate, a);
        assert_eq!(outcome.winners, vec![b, c]);
        assert!(outcome.tie_occurred);
        assert!(!check_first_winner_criterion(&outcome));
        // Final fill carries no transfer value.
        assert_eq!(outcome.rounds[1].transfer_value, None);
        assert_eq!(outcome.rounds[1].tallies_before[&b], dec("6"));
    }

    #[test]
    fn first_event_elimination_means_no_first_round_winner() {
        let content = "candidates: A,B,C\nseats: 1\n3 : A\n3 : B\n2 : C,A\n";
        let e = Election::parse(content).unwrap();
        let outcome = tabulate(&e, 5);
        assert_eq!(outcome.rounds[0].kind, RoundKind::Eliminated);
        assert!(!check_first_winner_criterion(&outcome));
    }

    #[test]
    fn reported_transfer_values_follow_first_round_tallies() {
        let e = Election::parse(TABLE1).unwrap();
        for precision in [3u32, 5] {
            let outcome = tabulate(&e, precision);
            let tallies = e.first_preference_tallies();
            let quota = Decimal::from(e.quota());
            for (&w, &tau) in &outcome.reported_transfer_values {
                let t = Decimal::from(tallies[w.index()]);
                assert_eq!(tau, ((t - quota) / t).trunc_with_scale(precision));
                assert!(tau >= Decimal::ZERO);
                assert!(tau < tau_max(e.seats()));
            }
        }
    }

    #[test]
    fn precision_five_changes_the_transfer_value() {
        let e = Election::parse(TABLE1).unwrap();
        let outcome = tabulate(&e, 5);
        // 202/510 = 0.39607843... truncates to 0.39607 at five places.
        assert_eq!(outcome.rounds[0].transfer_value, Some(dec("0.39607")));
        // Winners are unchanged.
        let winners: Vec<&str> = outcome
            .winners
            .iter()
            .map(|&w| e.candidate_name(w))
            .collect();
        assert_eq!(winners, vec!["C", "E", "A"]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn winners_do_not_depend_on_ballot_order(
            e in crate::ballots::test_support::arb_election(6, 8, 40),
            seed in any::<u64>(),
        ) {
            let outcome = tabulate(&e, 5);
            // Re-parse with shuffled ballot lines.
            let mut ballots: Vec<_> = e.ballots().to_vec();
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            ballots.shuffle(&mut rng);
            let names = e.candidates().iter().map(|c| c.name.clone()).collect();
            let shuffled = Election::new(names, ballots, e.seats()).unwrap();
            let outcome2 = tabulate(&shuffled, 5);
            prop_assert_eq!(outcome.winners, outcome2.winners);
            prop_assert_eq!(outcome.tie_occurred, outcome2.tie_occurred);
        }

        #[test]
        fn tabulation_is_deterministic(e in crate::ballots::test_support::arb_election(6, 8, 40)) {
            let a = tabulate(&e, 5);
            let b = tabulate(&e, 5);
            prop_assert_eq!(a, b);
        }

        #[test]
        fn surplus_transfers_conserve_value(e in crate::ballots::test_support::arb_election(6, 8, 40)) {
            let precision = 5u32;
            let outcome = tabulate(&e, precision);
            let quota = Decimal::from(e.quota());
            let step = Decimal::new(1, precision);
            for event in &outcome.rounds {
                let (Some(distributed), Some(exhausted), Some(papers)) =
                    (event.distributed, event.exhausted, event.transferred_ballots)
                else {
                    continue;
                };
                let tally = event.tallies_before[&event.candidate];
                let moved = distributed + exhausted;
                prop_assert!(distributed >= Decimal::ZERO);
                prop_assert!(exhausted >= Decimal::ZERO);
                match event.kind {
                    RoundKind::Elected => {
                        let surplus = tally - quota;
                        prop_assert!(tally >= quota);
                        prop_assert!(moved <= surplus);
                        // Two truncations per ballot: the transfer value and
                        // the re-weighted ballot value.
                        let bound = Decimal::from(papers) * step * Decimal::TWO;
                        prop_assert!(surplus - moved < bound + step);
                    }
                    RoundKind::Eliminated => {
                        prop_assert_eq!(moved, tally);
                    }
                }
            }
        }

        #[test]
        fn tallies_stay_non_negative_and_quota_honoured(
            e in crate::ballots::test_support::arb_election(6, 8, 40),
        ) {
            let outcome = tabulate(&e, 5);
            let quota = Decimal::from(e.quota());
            prop_assert_eq!(outcome.winners.len(), e.seats() as usize);
            for event in &outcome.rounds {
                for (_, tally) in &event.tallies_before {
                    prop_assert!(*tally >= Decimal::ZERO);
                }
                if event.kind == RoundKind::Elected && event.transfer_value.is_some() {
                    prop_assert!(event.tallies_before[&event.candidate] >= quota);
                }
            }
            for (_, tau) in &outcome.reported_transfer_values {
                prop_assert!(*tau >= Decimal::ZERO && *tau < tau_max(e.seats()));
            }
        }
    }
}
