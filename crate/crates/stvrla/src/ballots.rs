//! Ballot and election data model, file ingestion, and the basic formulas
//! (quota, projection, maximum transfer value) the rest of the crate builds on.
//!
//! Identical rankings are stored compressed as a ranking plus a count, so
//! scoring passes iterate ranking types rather than individual ballots. All
//! vote values are exact decimals ([`Decimal`]); transfer arithmetic truncates
//! rather than rounds, matching the counting rules used in Scottish council
//! elections.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of a candidate within an election. Indices are dense `0..num_candidates`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CandidateId(pub u32);

impl CandidateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for CandidateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

/// Candidate metadata. Names are unique within an election.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub name: String,
}

/// A ranking type: an ordered preference list plus the number of ballots
/// that expressed it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ballot {
    pub prefs: Vec<CandidateId>,
    pub count: u64,
}

/// Current value of a ballot paper, in `[0, 1]`, exactly representable at a
/// fixed number of decimal places.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BallotWeight(Decimal);

impl BallotWeight {
    /// Full value carried by a ballot before any surplus transfer.
    pub fn one() -> Self {
        BallotWeight(Decimal::ONE)
    }

    pub fn new(value: Decimal, precision: u32) -> Result<Self, ElectionError> {
        if value < Decimal::ZERO || value > Decimal::ONE {
            return Err(ElectionError::WeightOutOfRange(value));
        }
        if value != value.trunc_with_scale(precision) {
            return Err(ElectionError::WeightPrecision { value, precision });
        }
        Ok(BallotWeight(value))
    }

    pub fn value(self) -> Decimal {
        self.0
    }

    /// Multiplies by a transfer value and truncates to `precision` decimal
    /// places. Truncation (not rounding) per ballot paper is what keeps
    /// distributed value at or below the surplus.
    pub fn scaled(self, transfer_value: Decimal, precision: u32) -> BallotWeight {
        BallotWeight((self.0 * transfer_value).trunc_with_scale(precision))
    }

    pub fn is_zero(self) -> bool {
        self.0.is_zero()
    }
}

/// An STV election: candidates, the ballot multiset, seat count and quota.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Election {
    candidates: Vec<Candidate>,
    ballots: Vec<Ballot>,
    seats: u32,
    quota: u64,
    total_ballots: u64,
}

impl Election {
    /// Builds an election, validating every structural invariant: dense unique
    /// candidates, at least one ballot, non-empty duplicate-free rankings,
    /// positive counts, and `seats < |candidates|`. Identical rankings are
    /// merged by summing counts. The quota is always derived via
    /// [`droop_quota`].
    pub fn new(
        candidate_names: Vec<String>,
        ballots: Vec<Ballot>,
        seats: u32,
    ) -> Result<Self, ElectionError> {
        if seats == 0 {
            return Err(ElectionError::NoSeats);
        }
        if candidate_names.len() <= seats as usize {
            return Err(ElectionError::TooFewCandidates {
                candidates: candidate_names.len(),
                seats,
            });
        }
        let mut seen = BTreeSet::new();
        for name in &candidate_names {
            let trimmed = name.trim();
            if trimmed.is_empty() {
                return Err(ElectionError::EmptyCandidateName);
            }
            if trimmed.contains(',') || trimmed.contains('\n') {
                return Err(ElectionError::InvalidCandidateName(trimmed.to_string()));
            }
            if !seen.insert(trimmed.to_string()) {
                return Err(ElectionError::DuplicateCandidateName(trimmed.to_string()));
            }
        }
        if ballots.is_empty() {
            return Err(ElectionError::NoBallots);
        }
        let num_candidates = candidate_names.len() as u32;
        let mut merged: Vec<Ballot> = Vec::new();
        let mut by_prefs: HashMap<Vec<CandidateId>, usize> = HashMap::new();
        for ballot in ballots {
            if ballot.prefs.is_empty() {
                return Err(ElectionError::EmptyRanking);
            }
            if ballot.count == 0 {
                return Err(ElectionError::ZeroCount);
            }
            let mut in_ranking = BTreeSet::new();
            for &c in &ballot.prefs {
                if c.0 >= num_candidates {
                    return Err(ElectionError::UnknownCandidateIndex(c.0));
                }
                if !in_ranking.insert(c) {
                    return Err(ElectionError::DuplicateInRanking(c.0));
                }
            }
            match by_prefs.get(&ballot.prefs) {
                Some(&i) => merged[i].count += ballot.count,
                None => {
                    by_prefs.insert(ballot.prefs.clone(), merged.len());
                    merged.push(ballot);
                }
            }
        }
        let total_ballots: u64 = merged.iter().map(|b| b.count).sum();
        let quota = droop_quota(total_ballots, seats);
        Ok(Election {
            candidates: candidate_names
                .into_iter()
                .map(|name| Candidate {
                    name: name.trim().to_string(),
                })
                .collect(),
            ballots: merged,
            seats,
            quota,
            total_ballots,
        })
    }

    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }

    pub fn num_candidates(&self) -> usize {
        self.candidates.len()
    }

    pub fn candidate_ids(&self) -> impl Iterator<Item = CandidateId> + '_ {
        (0..self.candidates.len() as u32).map(CandidateId)
    }

    pub fn candidate_name(&self, id: CandidateId) -> &str {
        &self.candidates[id.index()].name
    }

    pub fn candidate_by_name(&self, name: &str) -> Option<CandidateId> {
        self.candidates
            .iter()
            .position(|c| c.name == name)
            .map(|i| CandidateId(i as u32))
    }

    pub fn ballots(&self) -> &[Ballot] {
        &self.ballots
    }

    pub fn seats(&self) -> u32 {
        self.seats
    }

    pub fn quota(&self) -> u64 {
        self.quota
    }

    pub fn total_ballots(&self) -> u64 {
        self.total_ballots
    }

    /// Number of ballots ranking each candidate first.
    pub fn first_preference_tallies(&self) -> Vec<u64> {
        let mut tallies = vec![0u64; self.candidates.len()];
        for ballot in &self.ballots {
            tallies[ballot.prefs[0].index()] += ballot.count;
        }
        tallies
    }

    /// Parses either the canonical text format or its JSON mirror, detecting
    /// the format from the first non-whitespace character.
    pub fn parse(content: &str) -> Result<Self, ParseError> {
        match content.trim_start().chars().next() {
            Some('{') => Self::from_json(content),
            _ => Self::from_text(content),
        }
    }

    /// Parses the canonical text format:
    ///
    /// ```text
    /// candidates: Alice,Bob,Carol
    /// seats: 2
    /// 120 : Alice,Bob
    /// 95 : Carol
    /// ```
    ///
    /// `#`-prefixed lines are comments. The `seats:` header may be omitted
    /// when the caller supplies a seat count (see [`parse_election`]).
    pub fn from_text(content: &str) -> Result<Self, ParseError> {
        Self::from_text_with_seats(content, None)
    }

    fn from_text_with_seats(content: &str, seats_override: Option<u32>) -> Result<Self, ParseError> {
        let mut names: Option<Vec<String>> = None;
        let mut seats: Option<u32> = None;
        let mut ballots: Vec<Ballot> = Vec::new();

        for (idx, raw) in content.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("candidates:") {
                if names.is_some() {
                    return Err(ParseError::Malformed {
                        line: line_no,
                        reason: "duplicate candidates header".into(),
                    });
                }
                let parsed: Vec<String> = rest
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect();
                if parsed.is_empty() {
                    return Err(ParseError::Malformed {
                        line: line_no,
                        reason: "empty candidate list".into(),
                    });
                }
                names = Some(parsed);
                continue;
            }
            if let Some(rest) = line.strip_prefix("seats:") {
                let n: u32 = rest.trim().parse().map_err(|_| ParseError::Malformed {
                    line: line_no,
                    reason: format!("invalid seat count `{}`", rest.trim()),
                })?;
                seats = Some(n);
                continue;
            }
            // Ranking line: `<count> : <name>,<name>,...`
            let Some((count_part, prefs_part)) = line.split_once(':') else {
                return Err(ParseError::Malformed {
                    line: line_no,
                    reason: "expected `<count> : <names>`".into(),
                });
            };
            let count: u64 = count_part.trim().parse().map_err(|_| ParseError::Malformed {
                line: line_no,
                reason: format!("invalid ballot count `{}`", count_part.trim()),
            })?;
            if count == 0 {
                return Err(ParseError::Malformed {
                    line: line_no,
                    reason: "ballot count must be positive".into(),
                });
            }
            let Some(names) = names.as_ref() else {
                return Err(ParseError::Malformed {
                    line: line_no,
                    reason: "ranking line before candidates header".into(),
                });
            };
            let prefs = parse_ranking(prefs_part, names, line_no)?;
            ballots.push(Ballot { prefs, count });
        }

        let names = names.ok_or(ParseError::MissingCandidates)?;
        let seats = seats_override.or(seats).ok_or(ParseError::MissingSeats)?;
        if ballots.is_empty() {
            return Err(ParseError::NoBallots);
        }
        Election::new(names, ballots, seats).map_err(ParseError::Invalid)
    }

    /// Parses the JSON mirror of the canonical format.
    pub fn from_json(content: &str) -> Result<Self, ParseError> {
        let raw: ElectionJson =
            serde_json::from_str(content).map_err(|e| ParseError::Json(e.to_string()))?;
        let mut ballots = Vec::with_capacity(raw.ballots.len());
        for (i, b) in raw.ballots.iter().enumerate() {
            let mut prefs = Vec::with_capacity(b.prefs.len());
            for name in &b.prefs {
                let pos = raw
                    .candidates
                    .iter()
                    .position(|n| n.trim() == name.trim())
                    .ok_or_else(|| ParseError::UnknownCandidate {
                        line: i + 1,
                        name: name.clone(),
                    })?;
                prefs.push(CandidateId(pos as u32));
            }
            ballots.push(Ballot {
                prefs,
                count: b.count,
            });
        }
        Election::new(raw.candidates, ballots, raw.seats).map_err(ParseError::Invalid)
    }

    /// Renders the canonical text format. `parse(to_text())` reproduces the
    /// election exactly.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("candidates: ");
        out.push_str(
            &self
                .candidates
                .iter()
                .map(|c| c.name.as_str())
                .collect::<Vec<_>>()
                .join(","),
        );
        out.push('\n');
        out.push_str(&format!("seats: {}\n", self.seats));
        for ballot in &self.ballots {
            let names: Vec<&str> = ballot
                .prefs
                .iter()
                .map(|&c| self.candidate_name(c))
                .collect();
            out.push_str(&format!("{} : {}\n", ballot.count, names.join(",")));
        }
        out
    }

    /// Renders the JSON mirror.
    pub fn to_json(&self) -> String {
        let raw = ElectionJson {
            candidates: self.candidates.iter().map(|c| c.name.clone()).collect(),
            seats: self.seats,
            ballots: self
                .ballots
                .iter()
                .map(|b| BallotJson {
                    count: b.count,
                    prefs: b
                        .prefs
                        .iter()
                        .map(|&c| self.candidate_name(c).to_string())
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("election serializes")
    }
}

/// Splits a ranking segment into candidate names. Comma is the separator;
/// a segment that matches no declared name is additionally split on
/// whitespace so compact inputs like `5 : A A B` resolve per token.
fn parse_ranking(
    prefs_part: &str,
    names: &[String],
    line_no: usize,
) -> Result<Vec<CandidateId>, ParseError> {
    let lookup = |token: &str| -> Option<CandidateId> {
        names
            .iter()
            .position(|n| n.trim() == token)
            .map(|i| CandidateId(i as u32))
    };
    let mut prefs = Vec::new();
    for segment in prefs_part.split(',') {
        let segment = segment.trim();
        if segment.is_empty() {
            continue;
        }
        if let Some(id) = lookup(segment) {
            prefs.push(id);
            continue;
        }
        let mut sub_ids = Vec::new();
        let mut all_known = true;
        for token in segment.split_whitespace() {
            match lookup(token) {
                Some(id) => sub_ids.push(id),
                None => {
                    all_known = false;
                    break;
                }
            }
        }
        if !all_known || sub_ids.is_empty() {
            return Err(ParseError::UnknownCandidate {
                line: line_no,
                name: segment.to_string(),
            });
        }
        prefs.extend(sub_ids);
    }
    if prefs.is_empty() {
        return Err(ParseError::Malformed {
            line: line_no,
            reason: "empty ranking".into(),
        });
    }
    let mut seen = BTreeSet::new();
    for &c in &prefs {
        if !seen.insert(c) {
            return Err(ParseError::DuplicateInRanking {
                line: line_no,
                index: c.0,
            });
        }
    }
    Ok(prefs)
}

/// Parses an election with an explicit seat count, which takes precedence
/// over any `seats:` header in the file.
pub fn parse_election(content: &str, seats: u32) -> Result<Election, ParseError> {
    match content.trim_start().chars().next() {
        Some('{') => {
            let raw: ElectionJson =
                serde_json::from_str(content).map_err(|e| ParseError::Json(e.to_string()))?;
            let adjusted = ElectionJson { seats, ..raw };
            Election::from_json(&serde_json::to_string(&adjusted).expect("round-trip"))
        }
        _ => Election::from_text_with_seats(content, Some(seats)),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ElectionJson {
    candidates: Vec<String>,
    seats: u32,
    ballots: Vec<BallotJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct BallotJson {
    count: u64,
    prefs: Vec<String>,
}

/// Droop quota: `floor(num_ballots / (seats + 1)) + 1`.
pub fn droop_quota(num_ballots: u64, seats: u32) -> u64 {
    num_ballots / (seats as u64 + 1) + 1
}

/// Projection of a preference sequence onto a candidate set: keeps exactly
/// the members of `keep`, preserving order.
pub fn projection(prefs: &[CandidateId], keep: &BTreeSet<CandidateId>) -> Vec<CandidateId> {
    prefs.iter().copied().filter(|c| keep.contains(c)).collect()
}

/// First candidate of a preference sequence, or `None` when exhausted.
pub fn first(prefs: &[CandidateId]) -> Option<CandidateId> {
    prefs.first().copied()
}

/// `first` of the projection onto the complement of `excluded`, computed
/// without building the projected sequence.
pub fn first_excluding(
    prefs: &[CandidateId],
    excluded: &BTreeSet<CandidateId>,
) -> Option<CandidateId> {
    prefs.iter().copied().find(|c| !excluded.contains(c))
}

/// Maximum theoretical transfer value for an `seats`-seat contest,
/// `seats / (seats + 1)`. When the decimal expansion does not terminate the
/// value is rounded up at nine places so that capping an upper bound here
/// never understates the theoretical maximum.
pub fn tau_max(seats: u32) -> Decimal {
    const SCALE: u32 = 9;
    let n = seats as i64;
    let exact = Decimal::from(n) / Decimal::from(n + 1);
    if exact * Decimal::from(n + 1) == Decimal::from(n) {
        return exact.normalize();
    }
    let pow = 10i64.pow(SCALE);
    let mantissa = (n * pow + n) / (n + 1); // ceil(n * 10^SCALE / (n + 1))
    Decimal::new(mantissa, SCALE).normalize()
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ElectionError {
    #[error("an election needs at least one seat")]
    NoSeats,
    #[error("{candidates} candidates cannot fill {seats} seats: need seats < candidates")]
    TooFewCandidates { candidates: usize, seats: u32 },
    #[error("candidate name is empty")]
    EmptyCandidateName,
    #[error("candidate name `{0}` contains a reserved character")]
    InvalidCandidateName(String),
    #[error("duplicate candidate name `{0}`")]
    DuplicateCandidateName(String),
    #[error("election has no ballots")]
    NoBallots,
    #[error("ranking is empty")]
    EmptyRanking,
    #[error("ballot count must be positive")]
    ZeroCount,
    #[error("ranking references unknown candidate index {0}")]
    UnknownCandidateIndex(u32),
    #[error("candidate index {0} appears twice in one ranking")]
    DuplicateInRanking(u32),
    #[error("ballot weight {0} outside [0, 1]")]
    WeightOutOfRange(Decimal),
    #[error("ballot weight {value} not representable at {precision} decimal places")]
    WeightPrecision { value: Decimal, precision: u32 },
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: unknown candidate `{name}`")]
    UnknownCandidate { line: usize, name: String },
    #[error("line {line}: candidate index {index} appears twice in one ranking")]
    DuplicateInRanking { line: usize, index: u32 },
    #[error("no candidates header found")]
    MissingCandidates,
    #[error("no seats header found and no seat count supplied")]
    MissingSeats,
    #[error("ballot file contains no rankings")]
    NoBallots,
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Invalid(#[from] ElectionError),
}


#[cfg(test)]
mod tests {
    use super::*;
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

    fn ids(indices: &[u32]) -> Vec<CandidateId> {
        indices.iter().copied().map(CandidateId).collect()
    }

    #[test]
    fn droop_quota_examples() {
        assert_eq!(droop_quota(1230, 3), 308);
        assert_eq!(droop_quota(100, 1), 51);
        assert_eq!(droop_quota(0, 3), 1);
    }

    #[test]
    fn tau_max_examples() {
        assert_eq!(tau_max(3), Decimal::from_str("0.75").unwrap());
        assert_eq!(tau_max(1), Decimal::from_str("0.5").unwrap());
        assert_eq!(tau_max(4), Decimal::from_str("0.8").unwrap());
        // 6/7 does not terminate; the cap must not fall below the true value.
        let cap = tau_max(6);
        assert!(cap * Decimal::from(7) >= Decimal::from(6));
        assert!(cap < Decimal::ONE);
    }

    #[test]
    fn projection_examples() {
        // sigma_{c2,c3}([c1,c2,c4,c3]) = [c2,c3]
        let keep: BTreeSet<_> = ids(&[2, 3]).into_iter().collect();
        assert_eq!(projection(&ids(&[1, 2, 4, 3]), &keep), ids(&[2, 3]));
        // sigma_{c2..c5}([c6,c4,c7,c2,c1]) = [c4,c2]
        let keep: BTreeSet<_> = ids(&[2, 3, 4, 5]).into_iter().collect();
        assert_eq!(projection(&ids(&[6, 4, 7, 2, 1]), &keep), ids(&[4, 2]));
        // empty keep-set
        assert_eq!(projection(&ids(&[1, 2]), &BTreeSet::new()), ids(&[]));
    }

    #[test]
    fn first_examples() {
        assert_eq!(first(&ids(&[1, 2, 3])), Some(CandidateId(1)));
        assert_eq!(first(&ids(&[])), None);
    }

    #[test]
    fn first_of_projection_skips_excluded() {
        // Ranking [C,D] with C removed continues to D.
        let e = Election::parse(TABLE1).unwrap();
        let c = e.candidate_by_name("C").unwrap();
        let d = e.candidate_by_name("D").unwrap();
        let keep: BTreeSet<_> = e.candidate_ids().filter(|&x| x != c).collect();
        let projected = projection(&[c, d], &keep);
        assert_eq!(first(&projected), Some(d));
        let excluded: BTreeSet<_> = [c].into_iter().collect();
        assert_eq!(first_excluding(&[c, d], &excluded), Some(d));
    }

    #[test]
    fn parses_table1() {
        let e = Election::parse(TABLE1).unwrap();
        assert_eq!(e.total_ballots(), 1230);
        assert_eq!(e.quota(), 308);
        assert_eq!(e.seats(), 3);
        assert_eq!(e.num_candidates(), 5);
        assert_eq!(e.first_preference_tallies(), vec![250, 120, 510, 0, 350]);
    }

    #[test]
    fn parses_single_line_with_seat_override() {
        let content = "candidates: A,B\n1 : A\n";
        let e = parse_election(content, 1).unwrap();
        assert_eq!(e.total_ballots(), 1);
        assert_eq!(e.quota(), 1);
    }

    #[test]
    fn rejects_duplicate_in_ranking() {
        let content = "candidates: A,B,C\nseats: 1\n5 : A A B\n";
        let err = Election::parse(content).unwrap_err();
        assert!(matches!(err, ParseError::DuplicateInRanking { .. }), "{err}");
    }

    #[test]
    fn rejects_empty_ballot_file() {
        let content = "candidates: A,B\nseats: 1\n";
        assert!(matches!(
            Election::parse(content).unwrap_err(),
            ParseError::NoBallots
        ));
    }

    #[test]
    fn reports_line_numbers() {
        let content = "candidates: A,B,C\nseats: 1\n3 : A\nnot-a-line\n";
        match Election::parse(content).unwrap_err() {
            ParseError::Malformed { line, .. } => assert_eq!(line, 4),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn unknown_candidate_is_an_error() {
        let content = "candidates: A,B\nseats: 1\n3 : A,Z\n";
        assert!(matches!(
            Election::parse(content).unwrap_err(),
            ParseError::UnknownCandidate { .. }
        ));
    }

    #[test]
    fn merges_duplicate_ranking_lines() {
        let content = "candidates: A,B\nseats: 1\n3 : A\n4 : A\n2 : B\n";
        let e = Election::parse(content).unwrap();
        assert_eq!(e.ballots().len(), 2);
        assert_eq!(e.ballots()[0].count, 7);
    }

    #[test]
    fn json_mirror_matches_text() {
        let text = Election::parse(TABLE1).unwrap();
        let json = Election::parse(&text.to_json()).unwrap();
        assert_eq!(text, json);
    }

    #[test]
    fn seats_must_be_below_candidate_count() {
        let content = "candidates: A,B\nseats: 2\n3 : A\n";
        assert!(matches!(
            Election::parse(content).unwrap_err(),
            ParseError::Invalid(ElectionError::TooFewCandidates { .. })
        ));
    }

    #[test]
    fn weight_truncates_on_scaling() {
        let w = BallotWeight::one();
        let tau = Decimal::from_str("0.396").unwrap();
        assert_eq!(w.scaled(tau, 3).value(), tau);
        let again = w.scaled(tau, 3).scaled(tau, 3);
        // 0.396 * 0.396 = 0.156816 -> truncates to 0.156
        assert_eq!(again.value(), Decimal::from_str("0.156").unwrap());
    }

    #[test]
    fn weight_construction_checks_range_and_precision() {
        assert!(BallotWeight::new(Decimal::from_str("1.5").unwrap(), 5).is_err());
        assert!(BallotWeight::new(Decimal::from_str("0.123456").unwrap(), 5).is_err());
        assert!(BallotWeight::new(Decimal::from_str("0.12345").unwrap(), 5).is_ok());
    }

    use super::test_support::arb_election;

    proptest! {
        #[test]
        fn projection_is_idempotent(
            prefs in proptest::collection::vec(0u32..12, 0..8),
            keep in proptest::collection::btree_set(0u32..12, 0..12),
        ) {
            let prefs: Vec<CandidateId> = {
                let mut seen = BTreeSet::new();
                prefs.into_iter().filter(|c| seen.insert(*c)).map(CandidateId).collect()
            };
            let keep: BTreeSet<CandidateId> = keep.into_iter().map(CandidateId).collect();
            let once = projection(&prefs, &keep);
            let twice = projection(&once, &keep);
            prop_assert_eq!(&once, &twice);
        }

        #[test]
        fn projection_onto_everything_is_identity(
            prefs in proptest::collection::vec(0u32..12, 0..8),
        ) {
            let prefs: Vec<CandidateId> = {
                let mut seen = BTreeSet::new();
                prefs.into_iter().filter(|c| seen.insert(*c)).map(CandidateId).collect()
            };
            let all: BTreeSet<CandidateId> = (0..12).map(CandidateId).collect();
            prop_assert_eq!(projection(&prefs, &all), prefs);
        }

        #[test]
        fn droop_quota_brackets_the_ballot_count(
            num_ballots in 0u64..2_000_000,
            seats in 1u32..20,
        ) {
            let q = droop_quota(num_ballots, seats);
            let s = seats as u64 + 1;
            prop_assert!(s * q > num_ballots);
            prop_assert!(s * (q - 1) <= num_ballots);
        }

        #[test]
        fn text_round_trip_is_identity(e in arb_election(6, 8, 50)) {
            let text = e.to_text();
            let back = Election::parse(&text).unwrap();
            prop_assert_eq!(&e, &back);
            let json = Election::parse(&e.to_json()).unwrap();
            prop_assert_eq!(&e, &json);
        }

        #[test]
        fn weight_sums_are_permutation_invariant(
            raw in proptest::collection::vec((0u64..100_000, 0u32..6), 1..40),
            seed in any::<u64>(),
        ) {
            // Fixed-precision weights sum to the same exact total in any order.
            let weights: Vec<Decimal> = raw
                .iter()
                .map(|&(mantissa, extra)| Decimal::new(mantissa as i64, 5) * Decimal::from(extra + 1))
                .collect();
            let forward: Decimal = weights.iter().copied().sum();
            let mut shuffled = weights.clone();
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            shuffled.shuffle(&mut rng);
            let backward: Decimal = shuffled.iter().copied().sum();
            prop_assert_eq!(forward, backward);
        }
    }
}
