//! Plan serialization, round logs, and batch summaries.
//!
//! All JSON emitted here is canonical: object keys sorted, decimals
//! normalized (no trailing zeros) and rendered as strings. Re-running a
//! command with the parameters echoed in a report reproduces the report
//! byte for byte.

use std::collections::BTreeMap;

use rust_decimal::Decimal;
use serde::Serialize;

use crate::assertions::{Assertion, AssertionKind};
use crate::ballots::Election;
use crate::planner::{AuditParams, AuditPlan, PlanKind, PricedAssertion, Strategy};
use crate::tabulation::{RoundEvent, RoundKind, TabulationOutcome};

/// Serializes any value as pretty JSON with sorted keys and a trailing
/// newline.
pub fn canonical_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("value serializes");
    let mut out = serde_json::to_string_pretty(&v).expect("value serializes");
    out.push('\n');
    out
}

/// One assertion in a serialized plan. Field names are stable; optional
/// fields are omitted when absent.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct AssertionReport {
    pub kind: AssertionKind,
    pub subject: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub opponent: Option<String>,
    #[serde(rename = "W", skip_serializing_if = "Option::is_none")]
    pub assumed_winners: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower: Option<BTreeMap<String, Decimal>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper: Option<BTreeMap<String, Decimal>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eliminated: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<Decimal>,
    pub margin: Decimal,
    pub asn: u64,
}

impl AssertionReport {
    pub fn new(priced: &PricedAssertion, election: &Election) -> Self {
        let name = |c| election.candidate_name(c).to_string();
        let assertion = &priced.assertion;
        let bounds = assertion.bounds().filter(|b| !b.is_empty());
        let bound_map = |m: &BTreeMap<crate::ballots::CandidateId, Decimal>| {
            m.iter()
                .map(|(&c, &v)| (name(c), v.normalize()))
                .collect::<BTreeMap<_, _>>()
        };
        AssertionReport {
            kind: assertion.kind(),
            subject: name(assertion.subject()),
            opponent: assertion.opponent().map(name),
            assumed_winners: bounds.map(|b| b.winners().map(name).collect()),
            lower: bounds.map(|b| bound_map(b.lower_map())),
            upper: bounds.map(|b| bound_map(b.upper_map())),
            eliminated: assertion
                .eliminated()
                .filter(|o| !o.is_empty())
                .map(|o| o.iter().map(|&c| name(c)).collect()),
            bound: match assertion {
                Assertion::Ut { tau_bar, .. } => Some(tau_bar.normalize()),
                Assertion::Lt { tau_lo, .. } => Some(tau_lo.normalize()),
                _ => None,
            },
            margin: priced.margin.normalize(),
            asn: priced.asn.value.ballots().expect("plan assertions are priced"),
        }
    }
}

/// Echo of every parameter that determines a plan, sufficient to reproduce
/// it bit for bit.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ParamsEcho {
    pub seed: u64,
    pub risk_limit: f64,
    pub error_rate: f64,
    pub reps: u32,
    pub delta: Decimal,
    pub max_asn: u64,
    pub precision: u32,
}

impl ParamsEcho {
    pub fn new(params: &AuditParams) -> Self {
        ParamsEcho {
            seed: params.risk.seed,
            risk_limit: params.risk.risk_limit,
            error_rate: params.risk.error_rate,
            reps: params.risk.reps,
            delta: params.delta.normalize(),
            max_asn: params.risk.max_sample,
            precision: params.precision,
        }
    }
}

/// Full description of a planned audit for one election.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct PlanReport {
    pub election: String,
    pub seats: u32,
    pub quota: u64,
    pub total_ballots: u64,
    pub strategy: Strategy,
    pub kind: PlanKind,
    pub winners: Vec<String>,
    pub first_round_winners: Vec<String>,
    pub verified_winners: Vec<String>,
    pub tie_occurred: bool,
    pub asn: u64,
    pub assertions: Vec<AssertionReport>,
    pub params: ParamsEcho,
}

impl PlanReport {
    pub fn new(
        instance: &str,
        election: &Election,
        outcome: &TabulationOutcome,
        plan: &AuditPlan,
        params: &AuditParams,
    ) -> Self {
        let name = |&c: &crate::ballots::CandidateId| election.candidate_name(c).to_string();
        PlanReport {
            election: instance.to_string(),
            seats: election.seats(),
            quota: election.quota(),
            total_ballots: election.total_ballots(),
            strategy: plan.strategy,
            kind: plan.kind,
            winners: outcome.winners.iter().map(name).collect(),
            first_round_winners: outcome.first_round_winners.iter().map(name).collect(),
            verified_winners: plan.verified_winners.iter().map(name).collect(),
            tie_occurred: outcome.tie_occurred,
            asn: plan.asn.value.ballots().unwrap_or(0),
            assertions: plan
                .assertions
                .iter()
                .map(|p| AssertionReport::new(p, election))
                .collect(),
            params: ParamsEcho::new(params),
        }
    }
}

/// One machine-readable record per tabulation round event.
#[derive(Debug, Clone, Serialize)]
pub struct RoundEventRecord {
    pub round: u32,
    pub kind: RoundKind,
    pub candidate: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transfer_value: Option<Decimal>,
    pub tallies: BTreeMap<String, Decimal>,
}

impl RoundEventRecord {
    pub fn new(event: &RoundEvent, election: &Election) -> Self {
        RoundEventRecord {
            round: event.round,
            kind: event.kind,
            candidate: election.candidate_name(event.candidate).to_string(),
            transfer_value: event.transfer_value.map(|t| t.normalize()),
            tallies: event
                .tallies_before
                .iter()
                .map(|(&c, &t)| (election.candidate_name(c).to_string(), t.normalize()))
                .collect(),
        }
    }

    /// Compact single-line JSON with sorted keys.
    pub fn to_json_line(&self) -> String {
        let v = serde_json::to_value(self).expect("record serializes");
        serde_json::to_string(&v).expect("record serializes")
    }
}

/// Per-instance row of a batch run; the raw data behind box-plot style
/// summaries.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct InstanceRecord {
    pub instance: String,
    pub seats: u32,
    pub winners: usize,
    pub winners_verified: usize,
    pub asn: u64,
    pub strategy: Strategy,
    pub kind: PlanKind,
}

impl InstanceRecord {
    pub fn new(instance: &str, election: &Election, plan: &AuditPlan) -> Self {
        InstanceRecord {
            instance: instance.to_string(),
            seats: election.seats(),
            winners: election.seats() as usize,
            winners_verified: plan.verified_winners.len(),
            asn: plan.asn.value.ballots().unwrap_or(0),
            strategy: plan.strategy,
            kind: plan.kind,
        }
    }
}

/// Aggregate row: how many instances of a seat count verified a given
/// number of winners, and the sample-size statistics for those audits.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct BatchSummaryRow {
    pub seats: u32,
    pub winners_verified: usize,
    pub instance_count: usize,
    pub instance_pct: Decimal,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub asn_avg: Option<Decimal>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub asn_min: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub asn_max: Option<u64>,
}

/// Groups instance records by (seats, winners verified). Percentages are per
/// seat-count group; sample-size statistics are omitted for the bucket that
/// verified nothing.
pub fn summarize(records: &[InstanceRecord]) -> Vec<BatchSummaryRow> {
    let mut group_totals: BTreeMap<u32, usize> = BTreeMap::new();
    for r in records {
        *group_totals.entry(r.seats).or_default() += 1;
    }
    let mut buckets: BTreeMap<(u32, usize), Vec<&InstanceRecord>> = BTreeMap::new();
    for r in records {
        buckets.entry((r.seats, r.winners_verified)).or_default().push(r);
    }
    buckets
        .into_iter()
        .map(|((seats, verified), rows)| {
            let count = rows.len();
            let total = group_totals[&seats];
            let pct = (Decimal::from(count as u64) * Decimal::from(100)
                / Decimal::from(total as u64))
            .round_dp(1)
            .normalize();
            let (asn_avg, asn_min, asn_max) = if verified == 0 {
                (None, None, None)
            } else {
                let asns: Vec<u64> = rows.iter().map(|r| r.asn).collect();
                let sum: u64 = asns.iter().sum();
                let avg = (Decimal::from(sum) / Decimal::from(asns.len() as u64))
                    .round_dp(1)
                    .normalize();
                (
                    Some(avg),
                    asns.iter().min().copied(),
                    asns.iter().max().copied(),
                )
            };
            BatchSummaryRow {
                seats,
                winners_verified: verified,
                instance_count: count,
                instance_pct: pct,
                asn_avg,
                asn_min,
                asn_max,
            }
        })
        .collect()
}

/// Writes instance records as CSV with the stable column set.
pub fn records_to_csv(records: &[InstanceRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["instance", "seats", "winners", "winners_verified", "asn", "strategy", "kind"])
        .expect("csv header");
    for r in records {
        w.write_record([
            r.instance.as_str(),
            &r.seats.to_string(),
            &r.winners.to_string(),
            &r.winners_verified.to_string(),
            &r.asn.to_string(),
            strategy_label(r.strategy),
            kind_label(r.kind),
        ])
        .expect("csv row");
    }
    String::from_utf8(w.into_inner().expect("csv flush")).expect("utf8 csv")
}

/// Writes summary rows as CSV; empty statistics render as empty fields.
pub fn summary_to_csv(rows: &[BatchSummaryRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "seats",
        "winners_verified",
        "instances",
        "pct",
        "asn_avg",
        "asn_min",
        "asn_max",
    ])
    .expect("csv header");
    for r in rows {
        w.write_record([
            r.seats.to_string(),
            r.winners_verified.to_string(),
            r.instance_count.to_string(),
            r.instance_pct.to_string(),
            r.asn_avg.map(|d| d.to_string()).unwrap_or_default(),
            r.asn_min.map(|v| v.to_string()).unwrap_or_default(),
            r.asn_max.map(|v| v.to_string()).unwrap_or_default(),
        ])
        .expect("csv row");
    }
    String::from_utf8(w.into_inner().expect("csv flush")).expect("utf8 csv")
}

pub fn strategy_label(strategy: Strategy) -> &'static str {
    match strategy {
        Strategy::StraightIqx => "straight_iqx",
        Strategy::DualLoop => "dual_loop",
    }
}

pub fn kind_label(kind: PlanKind) -> &'static str {
    match kind {
        PlanKind::Full => "full",
        PlanKind::Partial => "partial",
        PlanKind::None => "none",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::plan_audit;
    use crate::tabulation::tabulate;

    const TABLE1: &str = "\
candidates: A,B,C,D,E
seats: 3
250 : A
120 : B,A,C
400 : C,D
350 : E
110 : C,E,D
";

    fn quick_params() -> AuditParams {
        let mut p = AuditParams::default();
        p.risk.reps = 3;
        p.precision = 3;
        p
    }

    #[test]
    fn canonical_json_sorts_keys() {
        #[derive(Serialize)]
        struct Scrambled {
            zeta: u32,
            alpha: u32,
        }
        let out = canonical_json(&Scrambled { zeta: 1, alpha: 2 });
        let a = out.find("alpha").unwrap();
        let z = out.find("zeta").unwrap();
        assert!(a < z);
        assert!(out.ends_with('\n'));
    }

    #[test]
    fn report_round_trips_identically() {
        let e = Election::parse(TABLE1).unwrap();
        let params = quick_params();
        let outcome = tabulate(&e, params.precision);
        let plan = plan_audit(&e, &outcome, &params);
        let r1 = PlanReport::new("table1", &e, &outcome, &plan, &params);
        let plan2 = plan_audit(&e, &outcome, &params);
        let r2 = PlanReport::new("table1", &e, &outcome, &plan2, &params);
        assert_eq!(canonical_json(&r1), canonical_json(&r2));
    }

    #[test]
    fn summary_groups_and_percentages() {
        let rec = |instance: &str, seats, verified, asn| InstanceRecord {
            instance: instance.into(),
            seats,
            winners: seats as usize,
            winners_verified: verified,
            asn,
            strategy: Strategy::DualLoop,
            kind: if verified == seats as usize {
                PlanKind::Full
            } else if verified == 0 {
                PlanKind::None
            } else {
                PlanKind::Partial
            },
        };
        let records = vec![
            rec("a", 3, 3, 100),
            rec("b", 3, 3, 300),
            rec("c", 3, 2, 50),
            rec("d", 3, 0, 0),
            rec("e", 4, 4, 700),
        ];
        let rows = summarize(&records);
        assert_eq!(rows.len(), 4);
        let full3 = rows
            .iter()
            .find(|r| r.seats == 3 && r.winners_verified == 3)
            .unwrap();
        assert_eq!(full3.instance_count, 2);
        assert_eq!(full3.instance_pct.to_string(), "50");
        assert_eq!(full3.asn_avg.unwrap().to_string(), "200");
        assert_eq!((full3.asn_min, full3.asn_max), (Some(100), Some(300)));
        let none3 = rows
            .iter()
            .find(|r| r.seats == 3 && r.winners_verified == 0)
            .unwrap();
        assert!(none3.asn_avg.is_none());
        // Counts per seat group sum to the group total.
        let total3: usize = rows
            .iter()
            .filter(|r| r.seats == 3)
            .map(|r| r.instance_count)
            .sum();
        assert_eq!(total3, 4);
    }

    #[test]
    fn csv_has_stable_columns() {
        let records = vec![InstanceRecord {
            instance: "x".into(),
            seats: 3,
            winners: 3,
            winners_verified: 2,
            asn: 42,
            strategy: Strategy::StraightIqx,
            kind: PlanKind::Partial,
        }];
        let csv = records_to_csv(&records);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "instance,seats,winners,winners_verified,asn,strategy,kind"
        );
        assert_eq!(lines.next().unwrap(), "x,3,3,2,42,straight_iqx,partial");
    }
}
