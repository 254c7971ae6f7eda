//! Assertion types over the ballot multiset, their per-ballot contribution
//! scores, and conversion into normalized assorters testable by the risk
//! engine.
//!
//! Six assertion kinds are supported:
//!
//! * `IQ(c)` — c's first-preference tally reaches the quota.
//! * `UT(c, tau_bar)` — c's transfer value is below `tau_bar`.
//! * `LT(c, tau_lo)` — c's transfer value is above `tau_lo`.
//! * `AG*(w, l, W, bounds)` — w's minimum tally beats l's maximum tally.
//! * `NL*(w, l, W, bounds, O*)` — as `AG*`, with the candidates in `O*`
//!   assumed already eliminated when computing w's minimum tally.
//! * `IQX(w, W, bounds, O*)` — w's first preferences plus everything that
//!   must flow to w reaches the quota, guaranteeing w a seat.
//!
//! Contribution clauses are evaluated in order: the first matching case
//! decides a ballot's score. All aggregate tallies are exact decimals.

use std::collections::{BTreeMap, BTreeSet};

use rust_decimal::Decimal;
use serde::Serialize;
use thiserror::Error;

use crate::ballots::{first_excluding, Ballot, CandidateId, Election};

/// Lower and upper bounds on the transfer values of candidates assumed to
/// have been seated on first preferences (the set `W`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TransferBounds {
    lower: BTreeMap<CandidateId, Decimal>,
    upper: BTreeMap<CandidateId, Decimal>,
}

impl TransferBounds {
    /// No assumed first-preference winners: `W` is empty.
    pub fn empty() -> Self {
        Self::default()
    }

    /// Bounds for each member of `W`. Both maps must cover the same
    /// candidates, with `0 <= lower < upper <= tau_cap` pointwise.
    pub fn new(
        lower: BTreeMap<CandidateId, Decimal>,
        upper: BTreeMap<CandidateId, Decimal>,
        tau_cap: Decimal,
    ) -> Result<Self, AssertionError> {
        if lower.len() != upper.len() || !lower.keys().eq(upper.keys()) {
            return Err(AssertionError::BoundDomainMismatch);
        }
        for (&w, &lo) in &lower {
            let hi = upper[&w];
            if lo < Decimal::ZERO || lo >= tau_cap {
                return Err(AssertionError::BoundOutOfRange { candidate: w, value: lo });
            }
            if hi <= Decimal::ZERO || hi > tau_cap {
                return Err(AssertionError::BoundOutOfRange { candidate: w, value: hi });
            }
            if lo >= hi {
                return Err(AssertionError::BoundsCross { candidate: w, lower: lo, upper: hi });
            }
        }
        Ok(TransferBounds { lower, upper })
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    /// The assumed first-preference winner set `W`.
    pub fn winners(&self) -> impl Iterator<Item = CandidateId> + '_ {
        self.lower.keys().copied()
    }

    pub fn contains(&self, c: CandidateId) -> bool {
        self.lower.contains_key(&c)
    }

    pub fn lower(&self, c: CandidateId) -> Option<Decimal> {
        self.lower.get(&c).copied()
    }

    pub fn upper(&self, c: CandidateId) -> Option<Decimal> {
        self.upper.get(&c).copied()
    }

    pub fn lower_map(&self) -> &BTreeMap<CandidateId, Decimal> {
        &self.lower
    }

    pub fn upper_map(&self) -> &BTreeMap<CandidateId, Decimal> {
        &self.upper
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum AssertionKind {
    #[serde(rename = "IQ")]
    Iq,
    #[serde(rename = "UT")]
    Ut,
    #[serde(rename = "LT")]
    Lt,
    #[serde(rename = "AGstar")]
    AgStar,
    #[serde(rename = "NLstar")]
    NlStar,
    #[serde(rename = "IQX")]
    Iqx,
}

/// A single auditable claim about the ballot multiset.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Assertion {
    Iq {
        winner: CandidateId,
    },
    Ut {
        winner: CandidateId,
        tau_bar: Decimal,
    },
    Lt {
        winner: CandidateId,
        tau_lo: Decimal,
    },
    AgStar {
        winner: CandidateId,
        loser: CandidateId,
        bounds: TransferBounds,
    },
    NlStar {
        winner: CandidateId,
        loser: CandidateId,
        bounds: TransferBounds,
        eliminated: BTreeSet<CandidateId>,
    },
    Iqx {
        winner: CandidateId,
        bounds: TransferBounds,
        eliminated: BTreeSet<CandidateId>,
    },
}

impl Assertion {
    pub fn iq(winner: CandidateId) -> Self {
        Assertion::Iq { winner }
    }

    /// `UT(c, tau_bar)`: c's transfer value is less than `tau_bar`.
    pub fn ut(winner: CandidateId, tau_bar: Decimal) -> Result<Self, AssertionError> {
        check_unit_bound(tau_bar)?;
        Ok(Assertion::Ut { winner, tau_bar })
    }

    /// `LT(c, tau_lo)`: c's transfer value is greater than `tau_lo`.
    pub fn lt(winner: CandidateId, tau_lo: Decimal) -> Result<Self, AssertionError> {
        check_unit_bound(tau_lo)?;
        Ok(Assertion::Lt { winner, tau_lo })
    }

    pub fn ag_star(
        winner: CandidateId,
        loser: CandidateId,
        bounds: TransferBounds,
    ) -> Result<Self, AssertionError> {
        if winner == loser {
            return Err(AssertionError::WinnerIsLoser(winner));
        }
        if bounds.contains(winner) || bounds.contains(loser) {
            return Err(AssertionError::SubjectInsideW);
        }
        Ok(Assertion::AgStar { winner, loser, bounds })
    }

    pub fn nl_star(
        winner: CandidateId,
        loser: CandidateId,
        bounds: TransferBounds,
        eliminated: BTreeSet<CandidateId>,
    ) -> Result<Self, AssertionError> {
        if winner == loser {
            return Err(AssertionError::WinnerIsLoser(winner));
        }
        if bounds.contains(winner) || bounds.contains(loser) {
            return Err(AssertionError::SubjectInsideW);
        }
        if eliminated.contains(&winner)
            || eliminated.contains(&loser)
            || eliminated.iter().any(|&o| bounds.contains(o))
        {
            return Err(AssertionError::EliminatedOverlap);
        }
        Ok(Assertion::NlStar { winner, loser, bounds, eliminated })
    }

    pub fn iqx(
        winner: CandidateId,
        bounds: TransferBounds,
        eliminated: BTreeSet<CandidateId>,
    ) -> Result<Self, AssertionError> {
        if bounds.contains(winner) {
            return Err(AssertionError::SubjectInsideW);
        }
        if eliminated.contains(&winner) || eliminated.iter().any(|&o| bounds.contains(o)) {
            return Err(AssertionError::EliminatedOverlap);
        }
        Ok(Assertion::Iqx { winner, bounds, eliminated })
    }

    pub fn kind(&self) -> AssertionKind {
        match self {
            Assertion::Iq { .. } => AssertionKind::Iq,
            Assertion::Ut { .. } => AssertionKind::Ut,
            Assertion::Lt { .. } => AssertionKind::Lt,
            Assertion::AgStar { .. } => AssertionKind::AgStar,
            Assertion::NlStar { .. } => AssertionKind::NlStar,
            Assertion::Iqx { .. } => AssertionKind::Iqx,
        }
    }

    /// The candidate the assertion vouches for.
    pub fn subject(&self) -> CandidateId {
        match *self {
            Assertion::Iq { winner }
            | Assertion::Ut { winner, .. }
            | Assertion::Lt { winner, .. }
            | Assertion::AgStar { winner, .. }
            | Assertion::NlStar { winner, .. }
            | Assertion::Iqx { winner, .. } => winner,
        }
    }

    pub fn opponent(&self) -> Option<CandidateId> {
        match *self {
            Assertion::AgStar { loser, .. } | Assertion::NlStar { loser, .. } => Some(loser),
            _ => None,
        }
    }

    /// Exact evaluation against the reported ballots. `IQ`/`IQX` use a
    /// non-strict quota comparison; the other kinds are strict.
    pub fn holds(&self, election: &Election) -> bool {
        let quota = Decimal::from(election.quota());
        match self {
            Assertion::Iq { winner } => first_preference_tally(election, *winner) >= quota,
            // t < Q / (1 - tau_bar), evaluated as t * (1 - tau_bar) < Q to
            // stay in exact decimals.
            Assertion::Ut { winner, tau_bar } => {
                first_preference_tally(election, *winner) * (Decimal::ONE - tau_bar) < quota
            }
            Assertion::Lt { winner, tau_lo } => {
                first_preference_tally(election, *winner) * (Decimal::ONE - tau_lo) > quota
            }
            Assertion::AgStar { winner, loser, bounds } => {
                let (min_total, max_total) = ag_star_tallies(election, *winner, *loser, bounds);
                min_total > max_total
            }
            Assertion::NlStar { winner, loser, bounds, eliminated } => {
                let (min_total, max_total) =
                    nl_star_tallies(election, *winner, *loser, bounds, eliminated);
                min_total > max_total
            }
            Assertion::Iqx { winner, bounds, eliminated } => {
                iqx_tally(election, *winner, bounds, eliminated) >= quota
            }
        }
    }

    /// Stable 64-bit identity of the assertion, used to derive simulation
    /// seeds and to deduplicate assertion sets across candidate audits.
    pub fn stable_id(&self) -> u64 {
        let mut hasher = Fnv1a::new();
        hasher.write_u8(match self.kind() {
            AssertionKind::Iq => 1,
            AssertionKind::Ut => 2,
            AssertionKind::Lt => 3,
            AssertionKind::AgStar => 4,
            AssertionKind::NlStar => 5,
            AssertionKind::Iqx => 6,
        });
        hasher.write_u32(self.subject().0);
        if let Some(l) = self.opponent() {
            hasher.write_u32(l.0);
        }
        match self {
            Assertion::Ut { tau_bar: bound, .. } | Assertion::Lt { tau_lo: bound, .. } => {
                hasher.write_decimal(*bound);
            }
            _ => {}
        }
        if let Some(bounds) = self.bounds() {
            for (&w, &lo) in bounds.lower_map() {
                hasher.write_u32(w.0);
                hasher.write_decimal(lo);
                hasher.write_decimal(bounds.upper(w).expect("same domain"));
            }
        }
        if let Some(elim) = self.eliminated() {
            for &o in elim {
                hasher.write_u32(o.0);
            }
        }
        hasher.finish()
    }

    pub fn bounds(&self) -> Option<&TransferBounds> {
        match self {
            Assertion::AgStar { bounds, .. }
            | Assertion::NlStar { bounds, .. }
            | Assertion::Iqx { bounds, .. } => Some(bounds),
            _ => None,
        }
    }

    pub fn eliminated(&self) -> Option<&BTreeSet<CandidateId>> {
        match self {
            Assertion::NlStar { eliminated, .. } | Assertion::Iqx { eliminated, .. } => {
                Some(eliminated)
            }
            _ => None,
        }
    }

    /// Human-readable description using candidate names.
    pub fn describe(&self, election: &Election) -> String {
        let name = |c: CandidateId| election.candidate_name(c).to_string();
        match self {
            Assertion::Iq { winner } => format!("IQ({})", name(*winner)),
            Assertion::Ut { winner, tau_bar } => {
                format!("UT({}, {})", name(*winner), tau_bar.normalize())
            }
            Assertion::Lt { winner, tau_lo } => {
                format!("LT({}, {})", name(*winner), tau_lo.normalize())
            }
            Assertion::AgStar { winner, loser, .. } => {
                format!("AG*({}, {})", name(*winner), name(*loser))
            }
            Assertion::NlStar { winner, loser, eliminated, .. } => format!(
                "NL*({}, {}, O*={{{}}})",
                name(*winner),
                name(*loser),
                eliminated.iter().map(|&o| name(o)).collect::<Vec<_>>().join(",")
            ),
            Assertion::Iqx { winner, eliminated, .. } => format!(
                "IQX({}, O*={{{}}})",
                name(*winner),
                eliminated.iter().map(|&o| name(o)).collect::<Vec<_>>().join(",")
            ),
        }
    }

    /// Converts the assertion into a normalized assorter whose population
    /// mean exceeds one half exactly when the assertion holds (strictly; an
    /// `IQX` with fractional contributions meeting the quota exactly is
    /// treated as a zero-margin boundary).
    pub fn to_assorter(&self, election: &Election) -> Result<Assorter, AssertionError> {
        let n = Decimal::from(election.total_ballots());
        let quota = Decimal::from(election.quota());
        let half = Decimal::new(5, 1);
        let (scorer, g_lo, g_hi, threshold) = match self {
            Assertion::Iq { winner } => (
                RawScorer::Iq { winner: *winner },
                Decimal::ZERO,
                Decimal::ONE,
                quota - half,
            ),
            // LT compares t > Q / (1 - tau). Scaling scores by (1 - tau)
            // leaves the normalized assorter unchanged and keeps the
            // threshold an exact decimal.
            Assertion::Lt { winner, tau_lo } => {
                let factor = Decimal::ONE - tau_lo;
                (
                    RawScorer::Scaled { winner: *winner, factor, complement: false },
                    Decimal::ZERO,
                    factor,
                    quota,
                )
            }
            // UT compares t < Q / (1 - tau_bar), i.e. counts of ballots NOT
            // ranking the winner first must exceed (1 - tau_bar)|B| - Q.
            Assertion::Ut { winner, tau_bar } => {
                let factor = Decimal::ONE - tau_bar;
                (
                    RawScorer::Scaled { winner: *winner, factor, complement: true },
                    Decimal::ZERO,
                    factor,
                    factor * n - quota,
                )
            }
            Assertion::AgStar { winner, loser, bounds } => (
                RawScorer::MinMax {
                    winner: *winner,
                    loser: *loser,
                    bounds: bounds.clone(),
                    eliminated: None,
                },
                -Decimal::ONE,
                Decimal::ONE,
                Decimal::ZERO,
            ),
            Assertion::NlStar { winner, loser, bounds, eliminated } => (
                RawScorer::MinMax {
                    winner: *winner,
                    loser: *loser,
                    bounds: bounds.clone(),
                    eliminated: Some(eliminated.clone()),
                },
                -Decimal::ONE,
                Decimal::ONE,
                Decimal::ZERO,
            ),
            Assertion::Iqx { winner, bounds, eliminated } => {
                // Integer-valued contributions permit the exact half-ballot
                // tightening; fractional ones keep the conservative quota
                // threshold.
                let integral = bounds
                    .lower_map()
                    .values()
                    .all(|lo| lo.fract() == Decimal::ZERO);
                let threshold = if integral { quota - half } else { quota };
                (
                    RawScorer::Iqx {
                        winner: *winner,
                        bounds: bounds.clone(),
                        eliminated: eliminated.clone(),
                    },
                    Decimal::ZERO,
                    Decimal::ONE,
                    threshold,
                )
            }
        };
        if threshold <= n * g_lo {
            return Err(AssertionError::Vacuous);
        }
        let mut sum_g = Decimal::ZERO;
        for ballot in election.ballots() {
            sum_g += Decimal::from(ballot.count) * scorer.raw_score(ballot);
        }
        Ok(Assorter {
            source_id: self.stable_id(),
            scorer,
            g_lo,
            g_hi,
            threshold,
            population: election.total_ballots(),
            sum_g,
        })
    }
}

fn check_unit_bound(bound: Decimal) -> Result<(), AssertionError> {
    if bound < Decimal::ZERO || bound >= Decimal::ONE {
        return Err(AssertionError::TransferBoundOutOfUnit(bound));
    }
    Ok(())
}

/// `1` when `c` is ranked first, else `0`.
pub fn iq_score(ballot: &Ballot, c: CandidateId) -> Decimal {
    if ballot.prefs[0] == c {
        Decimal::ONE
    } else {
        Decimal::ZERO
    }
}

/// Tally threshold for `UT`/`LT`: `Q / (1 - bound)`. The comparison itself is
/// carried out in exact cross-multiplied form by [`Assertion::holds`]; this
/// is the explicit threshold value for reporting.
pub fn ut_threshold(quota: u64, tau_bar: Decimal) -> Result<Decimal, AssertionError> {
    check_unit_bound(tau_bar)?;
    Ok(Decimal::from(quota) / (Decimal::ONE - tau_bar))
}

/// See [`ut_threshold`]; `LT` uses the same expression with its lower bound.
pub fn lt_threshold(quota: u64, tau_lo: Decimal) -> Result<Decimal, AssertionError> {
    ut_threshold(quota, tau_lo)
}

/// Per-ballot contributions to w's minimum and l's maximum tally for `AG*`.
///
/// Minimum, first matching case: `1` when w is ranked first; `lower[first]`
/// when the first preference is in `W` and w is next after removing `W`;
/// else `0`. Maximum: `0` when l is absent or w precedes l;
/// `upper[first]` when the first preference is in `W`; else `1`.
pub fn ag_star_contributions(
    ballot: &Ballot,
    winner: CandidateId,
    loser: CandidateId,
    bounds: &TransferBounds,
) -> (Decimal, Decimal) {
    (
        min_contribution(ballot, winner, bounds, None),
        max_contribution(ballot, winner, loser, bounds),
    )
}

/// Per-ballot contributions for `NL*`: the minimum additionally counts
/// ballots reaching w once everyone in `eliminated` is removed; the maximum
/// is identical to `AG*`'s.
pub fn nl_star_contributions(
    ballot: &Ballot,
    winner: CandidateId,
    loser: CandidateId,
    bounds: &TransferBounds,
    eliminated: &BTreeSet<CandidateId>,
) -> (Decimal, Decimal) {
    (
        min_contribution(ballot, winner, bounds, Some(eliminated)),
        max_contribution(ballot, winner, loser, bounds),
    )
}

/// Per-ballot contribution to w's `IQX` tally; identical in form to the
/// `NL*` minimum contribution.
pub fn iqx_contribution(
    ballot: &Ballot,
    winner: CandidateId,
    bounds: &TransferBounds,
    eliminated: &BTreeSet<CandidateId>,
) -> Decimal {
    min_contribution(ballot, winner, bounds, Some(eliminated))
}

/// Shared minimum-tally contribution. With `eliminated = None` the first
/// clause requires w ranked first (the `AG*` form); with a set it requires w
/// first once the set is removed.
fn min_contribution(
    ballot: &Ballot,
    winner: CandidateId,
    bounds: &TransferBounds,
    eliminated: Option<&BTreeSet<CandidateId>>,
) -> Decimal {
    let first_case = match eliminated {
        None => ballot.prefs[0] == winner,
        Some(set) => first_excluding(&ballot.prefs, set) == Some(winner),
    };
    if first_case {
        return Decimal::ONE;
    }
    let first = ballot.prefs[0];
    if let Some(lo) = bounds.lower(first) {
        let w_set: BTreeSet<CandidateId> = bounds.winners().collect();
        if first_excluding(&ballot.prefs, &w_set) == Some(winner) {
            return lo;
        }
    }
    Decimal::ZERO
}

fn max_contribution(
    ballot: &Ballot,
    winner: CandidateId,
    loser: CandidateId,
    bounds: &TransferBounds,
) -> Decimal {
    let mut loser_pos = None;
    let mut winner_pos = None;
    for (i, &c) in ballot.prefs.iter().enumerate() {
        if c == loser {
            loser_pos = Some(i);
        } else if c == winner {
            winner_pos = Some(i);
        }
    }
    let Some(loser_pos) = loser_pos else {
        return Decimal::ZERO;
    };
    if let Some(winner_pos) = winner_pos {
        if winner_pos < loser_pos {
            return Decimal::ZERO;
        }
    }
    if let Some(hi) = bounds.upper(ballot.prefs[0]) {
        return hi;
    }
    Decimal::ONE
}

/// Aggregate minimum/maximum tallies for `AG*` over the full ballot multiset.
pub fn ag_star_tallies(
    election: &Election,
    winner: CandidateId,
    loser: CandidateId,
    bounds: &TransferBounds,
) -> (Decimal, Decimal) {
    let mut min_total = Decimal::ZERO;
    let mut max_total = Decimal::ZERO;
    for ballot in election.ballots() {
        let (lo, hi) = ag_star_contributions(ballot, winner, loser, bounds);
        let count = Decimal::from(ballot.count);
        min_total += count * lo;
        max_total += count * hi;
    }
    (min_total, max_total)
}

/// Aggregate minimum/maximum tallies for `NL*`.
pub fn nl_star_tallies(
    election: &Election,
    winner: CandidateId,
    loser: CandidateId,
    bounds: &TransferBounds,
    eliminated: &BTreeSet<CandidateId>,
) -> (Decimal, Decimal) {
    let mut min_total = Decimal::ZERO;
    let mut max_total = Decimal::ZERO;
    for ballot in election.ballots() {
        let (lo, hi) = nl_star_contributions(ballot, winner, loser, bounds, eliminated);
        let count = Decimal::from(ballot.count);
        min_total += count * lo;
        max_total += count * hi;
    }
    (min_total, max_total)
}

/// Aggregate `IQX` tally for w.
pub fn iqx_tally(
    election: &Election,
    winner: CandidateId,
    bounds: &TransferBounds,
    eliminated: &BTreeSet<CandidateId>,
) -> Decimal {
    let mut total = Decimal::ZERO;
    for ballot in election.ballots() {
        total += Decimal::from(ballot.count) * iqx_contribution(ballot, winner, bounds, eliminated);
    }
    total
}

/// First-preference tally as an exact decimal.
pub fn first_preference_tally(election: &Election, c: CandidateId) -> Decimal {
    let mut total = Decimal::ZERO;
    for ballot in election.ballots() {
        total += Decimal::from(ballot.count) * iq_score(ballot, c);
    }
    total
}

/// Raw (pre-normalization) per-ballot score function behind an assorter.
#[derive(Debug, Clone, PartialEq, Eq)]
enum RawScorer {
    Iq {
        winner: CandidateId,
    },
    /// `factor * iq` (LT) or `factor * (1 - iq)` (UT).
    Scaled {
        winner: CandidateId,
        factor: Decimal,
        complement: bool,
    },
    MinMax {
        winner: CandidateId,
        loser: CandidateId,
        bounds: TransferBounds,
        eliminated: Option<BTreeSet<CandidateId>>,
    },
    Iqx {
        winner: CandidateId,
        bounds: TransferBounds,
        eliminated: BTreeSet<CandidateId>,
    },
}

impl RawScorer {
    fn raw_score(&self, ballot: &Ballot) -> Decimal {
        match self {
            RawScorer::Iq { winner } => iq_score(ballot, *winner),
            RawScorer::Scaled { winner, factor, complement } => {
                let iq = iq_score(ballot, *winner);
                if *complement {
                    *factor * (Decimal::ONE - iq)
                } else {
                    *factor * iq
                }
            }
            RawScorer::MinMax { winner, loser, bounds, eliminated } => {
                let (lo, hi) = match eliminated {
                    None => ag_star_contributions(ballot, *winner, *loser, bounds),
                    Some(set) => nl_star_contributions(ballot, *winner, *loser, bounds, set),
                };
                lo - hi
            }
            RawScorer::Iqx { winner, bounds, eliminated } => {
                iqx_contribution(ballot, *winner, bounds, eliminated)
            }
        }
    }
}

/// A normalized per-ballot score in `[0, upper_bound()]` whose population
/// mean exceeds one half exactly when the underlying assertion holds.
///
/// The raw score `g` and threshold `T` are exact decimals; margin decisions
/// compare `sum(g)` against `T` without division. The normalized view is
/// `A(b) = (g(b) - g_lo) / (2 (T/n - g_lo))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assorter {
    source_id: u64,
    scorer: RawScorer,
    g_lo: Decimal,
    g_hi: Decimal,
    threshold: Decimal,
    population: u64,
    sum_g: Decimal,
}

impl Assorter {
    /// Stable id of the assertion this assorter was derived from.
    pub fn source_id(&self) -> u64 {
        self.source_id
    }

    pub fn population(&self) -> u64 {
        self.population
    }

    /// Raw score `g(b)`, exact.
    pub fn raw_score(&self, ballot: &Ballot) -> Decimal {
        self.scorer.raw_score(ballot)
    }

    pub fn raw_floor(&self) -> Decimal {
        self.g_lo
    }

    pub fn raw_ceiling(&self) -> Decimal {
        self.g_hi
    }

    /// Raw threshold `T`: the assertion holds strictly iff `sum(g) > T`.
    pub fn raw_threshold(&self) -> Decimal {
        self.threshold
    }

    pub fn raw_sum(&self) -> Decimal {
        self.sum_g
    }

    fn denominator(&self) -> Decimal {
        let n = Decimal::from(self.population);
        Decimal::TWO * (self.threshold / n - self.g_lo)
    }

    /// Normalized upper bound `u`.
    pub fn upper_bound(&self) -> Decimal {
        (self.g_hi - self.g_lo) / self.denominator()
    }

    /// Normalized score in `[0, u]`.
    pub fn score(&self, ballot: &Ballot) -> Decimal {
        (self.raw_score(ballot) - self.g_lo) / self.denominator()
    }

    /// Mean of the normalized score over the reported ballots.
    pub fn reported_mean(&self) -> Decimal {
        let n = Decimal::from(self.population);
        (self.sum_g - n * self.g_lo) / (Decimal::TWO * (self.threshold - n * self.g_lo))
    }

    /// `2 * reported_mean - 1`.
    pub fn margin(&self) -> Decimal {
        let n = Decimal::from(self.population);
        (self.sum_g - self.threshold) / (self.threshold - n * self.g_lo)
    }

    /// Exact sign test: true iff the reported mean strictly exceeds one half.
    pub fn reported_mean_exceeds_half(&self) -> bool {
        self.sum_g > self.threshold
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AssertionError {
    #[error("transfer bound {0} outside [0, 1)")]
    TransferBoundOutOfUnit(Decimal),
    #[error("lower and upper bound maps cover different candidates")]
    BoundDomainMismatch,
    #[error("bound {value} for candidate {candidate} outside its valid range")]
    BoundOutOfRange { candidate: CandidateId, value: Decimal },
    #[error("lower bound {lower} not below upper bound {upper} for candidate {candidate}")]
    BoundsCross {
        candidate: CandidateId,
        lower: Decimal,
        upper: Decimal,
    },
    #[error("winner and loser are the same candidate {0}")]
    WinnerIsLoser(CandidateId),
    #[error("assertion subject or opponent lies inside the assumed winner set")]
    SubjectInsideW,
    #[error("assumed-eliminated set overlaps the subject, opponent or assumed winners")]
    EliminatedOverlap,
    #[error("assertion is vacuous: threshold not above the per-ballot floor")]
    Vacuous,
}

/// FNV-1a, 64-bit. Used for stable assertion identities; must not change
/// across releases or platforms.
struct Fnv1a(u64);

impl Fnv1a {
    fn new() -> Self {
        Fnv1a(0xcbf2_9ce4_8422_2325)
    }

    fn write_u8(&mut self, byte: u8) {
        self.0 ^= byte as u64;
        self.0 = self.0.wrapping_mul(0x100_0000_01b3);
    }

    fn write_u32(&mut self, value: u32) {
        for byte in value.to_le_bytes() {
            self.write_u8(byte);
        }
    }

    fn write_decimal(&mut self, value: Decimal) {
        for byte in value.normalize().serialize() {
            self.write_u8(byte);
        }
    }

    fn finish(&self) -> u64 {
        self.0
    }
}

pub(crate) fn fnv1a_bytes(bytes: &[u8]) -> u64 {
    let mut hasher = Fnv1a::new();
    for &b in bytes {
        hasher.write_u8(b);
    }
    hasher.finish()
}
