//! Planning risk-limiting audits for multi-seat STV elections.
//!
//! Given the reported ballots of a single transferable vote contest counted
//! with the Weighted Inclusive Gregory method, where at least one candidate
//! reached the quota on first preferences, this crate:
//!
//! * tabulates the reported outcome ([`tabulation`]),
//! * forms per-ballot-scorable assertions whose joint truth implies the
//!   reported winners really won ([`assertions`]),
//! * prices each assertion with a simulated ALPHA-martingale sample size
//!   ([`risk`]),
//! * and searches for the assertion set that verifies as many winners as
//!   possible at the lowest expected cost ([`planner`]).
//!
//! The result is a full audit (all winners verified), a partial audit (a
//! proper subset), or a finding that no audit of this style exists for the
//! contest.
//!
//! Start with the runnable examples (`cargo run --example dual_loop`) or the
//! `stvrla` binary (`stvrla audit <ballots.txt>`).

pub mod assertions;
pub mod ballots;
pub mod commands;
pub mod planner;
pub mod report;
pub mod risk;
pub mod tabulation;

pub use assertions::{Assertion, AssertionKind, Assorter, TransferBounds};
pub use ballots::{
    droop_quota, first, parse_election, projection, tau_max, Ballot, BallotWeight, Candidate,
    CandidateId, Election,
};
pub use planner::{
    dual_loop_audit, plan_audit, straight_iqx_audit, AuditContext, AuditParams, AuditPlan,
    PlanKind, PricedAssertion, Strategy,
};
pub use report::{BatchSummaryRow, InstanceRecord, PlanReport};
pub use risk::{alpha_martingale, asn_of_set, estimate_asn, AsnEstimate, AsnParams, AsnValue};
pub use tabulation::{check_first_winner_criterion, tabulate, TabulationOutcome};
