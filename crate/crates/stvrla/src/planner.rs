//! Audit formation: the straight-IQX strategy, the dual-loop neighbourhood
//! search over transfer-value bound vectors, and final plan selection.
//!
//! An assertion is *auditable* when it is true on the reported ballots, has
//! positive margin, and its estimated sample size does not exceed the
//! configured maximum. Audits are sets of auditable assertions; the cost of
//! a set is the largest member cost. A full audit verifies every reported
//! winner; a partial audit verifies a proper non-empty subset.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Mutex;

use rust_decimal::Decimal;
use serde::Serialize;

use crate::assertions::{Assertion, TransferBounds};
use crate::ballots::{tau_max, CandidateId, Election};
use crate::risk::{asn_of_set, estimate_asn, AsnEstimate, AsnParams, AsnValue};
use crate::tabulation::TabulationOutcome;

/// Search and pricing parameters for audit formation.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditParams {
    pub risk: AsnParams,
    /// Neighbourhood step for transfer-value bounds.
    pub delta: Decimal,
    /// Decimal places used by the tabulation whose outcome is audited.
    pub precision: u32,
}

impl Default for AuditParams {
    fn default() -> Self {
        AuditParams {
            risk: AsnParams::default(),
            delta: Decimal::new(5, 3), // 0.005
            precision: 5,
        }
    }
}

impl AuditParams {
    /// The step must be positive and representable at the tabulation
    /// precision, otherwise lower bounds could overstate what truncated
    /// ballot weights actually carry.
    pub fn validate(&self) -> Result<(), String> {
        self.risk.validate().map_err(|e| e.to_string())?;
        if self.delta <= Decimal::ZERO {
            return Err("delta must be positive".to_string());
        }
        if self.delta != self.delta.trunc_with_scale(self.precision) {
            return Err(format!(
                "delta {} has more than {} decimal places",
                self.delta, self.precision
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    StraightIqx,
    DualLoop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanKind {
    Full,
    Partial,
    None,
}

/// An assertion together with its margin and estimated cost.
#[derive(Debug, Clone, PartialEq)]
pub struct PricedAssertion {
    pub assertion: Assertion,
    pub margin: Decimal,
    pub asn: AsnEstimate,
}

/// The planner's output: an assertion set, the winners it verifies, and the
/// estimated cost of auditing it.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditPlan {
    pub assertions: Vec<PricedAssertion>,
    pub verified_winners: BTreeSet<CandidateId>,
    pub asn: AsnEstimate,
    pub kind: PlanKind,
    pub strategy: Strategy,
}

impl AuditPlan {
    fn empty(strategy: Strategy) -> Self {
        AuditPlan {
            assertions: Vec::new(),
            verified_winners: BTreeSet::new(),
            asn: asn_of_set([]),
            kind: PlanKind::None,
            strategy,
        }
    }
}

/// A candidate transfer-value bound vector over the verified first-round
/// winners.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BoundVector {
    pub kind: BoundKind,
    pub values: BTreeMap<CandidateId, Decimal>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoundKind {
    Lower,
    Upper,
}

/// Neighbourhood of a bound vector: up to one new vector per coordinate,
/// stepping lower bounds down towards zero and upper bounds up towards
/// `tau_cap`. Returns an empty list when no coordinate can move.
pub fn neighbours(vector: &BoundVector, delta: Decimal, tau_cap: Decimal) -> Vec<BoundVector> {
    let mut out = Vec::new();
    for (&w, &v) in &vector.values {
        let moved = match vector.kind {
            BoundKind::Lower if v > Decimal::ZERO => (v - delta).max(Decimal::ZERO),
            BoundKind::Upper if v < tau_cap => (v + delta).min(tau_cap),
            _ => continue,
        };
        let mut values = vector.values.clone();
        values.insert(w, moved);
        out.push(BoundVector { kind: vector.kind, values });
    }
    out
}

/// Strict improvement order over candidate audits: more verified winners
/// wins; at equal counts, strictly smaller cost wins; ties are not
/// improvements.
pub fn plan_improves(
    candidate_verified: usize,
    candidate_asn: AsnValue,
    incumbent_verified: usize,
    incumbent_asn: AsnValue,
) -> bool {
    candidate_verified > incumbent_verified
        || (candidate_verified == incumbent_verified && candidate_asn < incumbent_asn)
}

/// A candidate audit under construction: a deduplicated assertion set, the
/// winners it verifies, and its cost.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateAudit {
    assertions: BTreeMap<Assertion, PricedAssertion>,
    verified: BTreeSet<CandidateId>,
}

impl CandidateAudit {
    fn new() -> Self {
        CandidateAudit {
            assertions: BTreeMap::new(),
            verified: BTreeSet::new(),
        }
    }

    fn insert(&mut self, priced: PricedAssertion) {
        self.assertions.insert(priced.assertion.clone(), priced);
    }

    fn extend(&mut self, priced: impl IntoIterator<Item = PricedAssertion>) {
        for p in priced {
            self.insert(p);
        }
    }

    pub fn asn(&self) -> AsnValue {
        asn_of_set(self.assertions.values().map(|p| &p.asn)).value
    }

    pub fn verified(&self) -> &BTreeSet<CandidateId> {
        &self.verified
    }

    pub fn assertions(&self) -> impl Iterator<Item = &PricedAssertion> {
        self.assertions.values()
    }

    fn improves(&self, incumbent: &CandidateAudit) -> bool {
        plan_improves(
            self.verified.len(),
            self.asn(),
            incumbent.verified.len(),
            incumbent.asn(),
        )
    }

    /// Largest cost over members of the given kinds; `None` when absent.
    fn max_asn_of<F: Fn(&Assertion) -> bool>(&self, pred: F) -> Option<AsnValue> {
        self.assertions
            .values()
            .filter(|p| pred(&p.assertion))
            .map(|p| p.asn.value)
            .max()
    }

    /// True when some assertion matching the predicate attains the set's
    /// maximum cost.
    fn kind_is_most_expensive<F: Fn(&Assertion) -> bool>(&self, pred: F) -> bool {
        let Some(overall) = self.assertions.values().map(|p| p.asn.value).max() else {
            return false;
        };
        self.max_asn_of(pred) == Some(overall)
    }

    fn into_plan(self, strategy: Strategy, all_winners: &BTreeSet<CandidateId>) -> AuditPlan {
        let asn = asn_of_set(self.assertions.values().map(|p| &p.asn));
        let kind = if self.verified.is_empty() {
            PlanKind::None
        } else if &self.verified == all_winners {
            PlanKind::Full
        } else {
            PlanKind::Partial
        };
        let mut assertions: Vec<PricedAssertion> = self.assertions.into_values().collect();
        assertions.sort_by(|a, b| a.assertion.cmp(&b.assertion));
        AuditPlan {
            assertions,
            verified_winners: self.verified,
            asn,
            kind,
            strategy,
        }
    }
}

/// Prices assertions against one election, caching results so revisited
/// bound vectors never re-run simulations. `None` means not auditable.
pub struct Pricer<'a> {
    election: &'a Election,
    params: &'a AuditParams,
    cache: Mutex<HashMap<Assertion, Option<PricedAssertion>>>,
}

impl<'a> Pricer<'a> {
    pub fn new(election: &'a Election, params: &'a AuditParams) -> Self {
        Pricer {
            election,
            params,
            cache: Mutex::new(HashMap::new()),
        }
    }

    /// Returns the priced assertion when auditable: true on the reported
    /// ballots, positive margin, and estimated cost within the budget.
    pub fn price(&self, assertion: &Assertion) -> Option<PricedAssertion> {
        if let Some(hit) = self.cache.lock().expect("pricer lock").get(assertion) {
            return hit.clone();
        }
        let priced = self.price_uncached(assertion);
        self.cache
            .lock()
            .expect("pricer lock")
            .insert(assertion.clone(), priced.clone());
        priced
    }

    fn price_uncached(&self, assertion: &Assertion) -> Option<PricedAssertion> {
        if !assertion.holds(self.election) {
            return None;
        }
        let assorter = assertion.to_assorter(self.election).ok()?;
        let margin = assorter.margin();
        if margin <= Decimal::ZERO {
            return None;
        }
        let asn = estimate_asn(&assorter, self.election, &self.params.risk);
        match asn.value {
            AsnValue::Ballots(n) if n <= self.params.risk.max_sample => Some(PricedAssertion {
                assertion: assertion.clone(),
                margin,
                asn,
            }),
            _ => None,
        }
    }
}

/// Shared state for one audit-formation run.
pub struct AuditContext<'a> {
    pub election: &'a Election,
    pub outcome: &'a TabulationOutcome,
    pub params: &'a AuditParams,
    pricer: Pricer<'a>,
    construct_cache: Mutex<HashMap<(BoundVector, BoundVector), ConstructResult>>,
    tau_cap: Decimal,
}

impl<'a> AuditContext<'a> {
    pub fn new(
        election: &'a Election,
        outcome: &'a TabulationOutcome,
        params: &'a AuditParams,
    ) -> Self {
        AuditContext {
            election,
            outcome,
            params,
            pricer: Pricer::new(election, params),
            construct_cache: Mutex::new(HashMap::new()),
            tau_cap: tau_max(election.seats()),
        }
    }

    pub fn pricer(&self) -> &Pricer<'a> {
        &self.pricer
    }

    pub fn tau_cap(&self) -> Decimal {
        self.tau_cap
    }

    fn winners_set(&self) -> BTreeSet<CandidateId> {
        self.outcome.winners.iter().copied().collect()
    }
}

type ConstructResult = (Option<CandidateAudit>, CandidateAudit);

/// Straight-IQX strategy: with no assumptions about first-round winners,
/// compute every auditable `AG*(w, l)` over winners and losers, collect each
/// winner's beaten set, and form one `IQX` per winner. Succeeds only when
/// every reported winner gets an auditable `IQX`; the plan then contains the
/// winners' `IQX` assertions plus the `AG*` assertions behind their `O*`
/// sets.
pub fn straight_iqx_audit(ctx: &AuditContext) -> Option<AuditPlan> {
    let mut audit = CandidateAudit::new();
    for &w in &ctx.outcome.winners {
        let mut supporting: Vec<PricedAssertion> = Vec::new();
        let mut beaten: BTreeSet<CandidateId> = BTreeSet::new();
        for &l in &ctx.outcome.losers {
            let ag = Assertion::ag_star(w, l, TransferBounds::empty()).expect("distinct w, l");
            if let Some(priced) = ctx.pricer.price(&ag) {
                supporting.push(priced);
                beaten.insert(l);
            }
        }
        let iqx = Assertion::iqx(w, TransferBounds::empty(), beaten).expect("valid iqx");
        let priced = ctx.pricer.price(&iqx)?;
        audit.insert(priced);
        audit.extend(supporting);
        audit.verified.insert(w);
    }
    Some(audit.into_plan(Strategy::StraightIqx, &ctx.winners_set()))
}

/// Builds the set of auditable `IQ` assertions over the reported first-round
/// winners, keyed by winner.
fn auditable_iq(ctx: &AuditContext) -> BTreeMap<CandidateId, PricedAssertion> {
    ctx.outcome
        .first_round_winners
        .iter()
        .filter_map(|&w| ctx.pricer.price(&Assertion::iq(w)).map(|p| (w, p)))
        .collect()
}

/// Dual-loop strategy: verify what first-round `IQ` assertions can, then
/// search lower-bound vectors (outer loop) and upper-bound vectors (inner
/// loop) on the verified winners' transfer values to verify the rest.
/// Returns the best full audit found, otherwise the best partial audit, with
/// `PlanKind::None` when no first-round winner has an auditable `IQ`.
pub fn dual_loop_audit(ctx: &AuditContext) -> AuditPlan {
    let all_winners = ctx.winners_set();
    let iq = auditable_iq(ctx);
    if iq.is_empty() {
        return AuditPlan::empty(Strategy::DualLoop);
    }
    let mut base = CandidateAudit::new();
    base.extend(iq.values().cloned());
    base.verified = iq.keys().copied().collect();
    if base.verified.len() == all_winners.len() {
        return base.into_plan(Strategy::DualLoop, &all_winners);
    }

    let w_prime: BTreeSet<CandidateId> = iq.keys().copied().collect();
    let unverified: BTreeSet<CandidateId> =
        all_winners.difference(&w_prime).copied().collect();
    let delta = ctx.params.delta;

    let mut best_full: Option<CandidateAudit> = None;
    let mut best_partial = base.clone();

    let lower0 = BoundVector {
        kind: BoundKind::Lower,
        values: w_prime
            .iter()
            .map(|&w| {
                let tau_r = ctx.outcome.reported_transfer_values[&w];
                (w, (tau_r - delta).max(Decimal::ZERO))
            })
            .collect(),
    };
    let mut neighbourhood = vec![lower0];

    while !neighbourhood.is_empty() {
        let mut best_lower = neighbourhood[0].clone();
        for lower in &neighbourhood {
            let (full, partial) = inner_loop(ctx, lower, &w_prime, &base, &unverified);
            let current_best = best_full.as_ref().map(|f| f.asn());
            let candidate = full.as_ref().map(|f| f.asn());
            if better_full(candidate, current_best) {
                best_full = full.clone();
                best_partial = full.expect("candidate full exists");
                best_lower = lower.clone();
            } else if partial.improves(&best_partial) {
                best_partial = partial;
                best_lower = lower.clone();
            }
        }
        neighbourhood = neighbours(&best_lower, delta, ctx.tau_cap);
        // Stop once all lower bounds are validated by formable assertions
        // and those assertions are not the budget-setting members: shrinking
        // the bounds further only cheapens them while making winner
        // verification harder.
        if lt_assertions_formable(ctx, &best_lower)
            && !best_partial.kind_is_most_expensive(|a| matches!(a, Assertion::Lt { .. }))
        {
            break;
        }
    }

    match best_full {
        Some(full) => full.into_plan(Strategy::DualLoop, &all_winners),
        None => best_partial.into_plan(Strategy::DualLoop, &all_winners),
    }
}

fn better_full(candidate: Option<AsnValue>, incumbent: Option<AsnValue>) -> bool {
    match (candidate, incumbent) {
        (Some(c), Some(i)) => c < i,
        (Some(_), None) => true,
        (None, _) => false,
    }
}

/// True when every positive lower bound in the vector has an auditable `LT`
/// assertion (a zero bound needs none).
fn lt_assertions_formable(ctx: &AuditContext, lower: &BoundVector) -> bool {
    lower.values.iter().all(|(&w, &bound)| {
        bound == Decimal::ZERO
            || ctx
                .pricer
                .price(&Assertion::lt(w, bound).expect("bound within unit interval"))
                .is_some()
    })
}

/// True when every below-cap upper bound in the vector has an auditable `UT`
/// assertion (a bound at the theoretical maximum needs none).
fn ut_assertions_formable(ctx: &AuditContext, upper: &BoundVector) -> bool {
    upper.values.iter().all(|(&w, &bound)| {
        bound == ctx.tau_cap
            || ctx
                .pricer
                .price(&Assertion::ut(w, bound).expect("bound within unit interval"))
                .is_some()
    })
}

/// Inner loop: for a fixed lower-bound vector, search upper-bound vectors
/// starting just above the reported transfer values. Returns the best full
/// and partial audits found for this lower-bound vector.
pub fn inner_loop(
    ctx: &AuditContext,
    lower: &BoundVector,
    w_prime: &BTreeSet<CandidateId>,
    base: &CandidateAudit,
    unverified: &BTreeSet<CandidateId>,
) -> (Option<CandidateAudit>, CandidateAudit) {
    let delta = ctx.params.delta;
    let mut best_full: Option<CandidateAudit> = None;
    let mut best_partial = base.clone();

    let upper0 = BoundVector {
        kind: BoundKind::Upper,
        values: w_prime
            .iter()
            .map(|&w| {
                let tau_r = ctx.outcome.reported_transfer_values[&w];
                (w, (tau_r + delta).min(ctx.tau_cap))
            })
            .collect(),
    };
    let mut neighbourhood = vec![upper0];

    while !neighbourhood.is_empty() {
        let mut best_upper = neighbourhood[0].clone();
        for upper in &neighbourhood {
            let (full, partial) = construct_audit(ctx, lower, upper, w_prime, base, unverified);
            let current_best = best_full.as_ref().map(|f| f.asn());
            let candidate = full.as_ref().map(|f| f.asn());
            if better_full(candidate, current_best) {
                best_full = full.clone();
                best_partial = full.expect("candidate full exists");
                best_upper = upper.clone();
            } else if partial.improves(&best_partial) {
                best_partial = partial;
                best_upper = upper.clone();
            }
        }
        neighbourhood = neighbours(&best_upper, delta, ctx.tau_cap);
        if ut_assertions_formable(ctx, &best_upper)
            && !best_partial.kind_is_most_expensive(|a| matches!(a, Assertion::Ut { .. }))
        {
            break;
        }
    }

    (best_full, best_partial)
}

/// Constructs a candidate full and partial audit for one pair of bound
/// vectors. Validates the bounds with `LT`/`UT` assertions (skipping zero
/// lower bounds and at-cap upper bounds), then tries three verification
/// routes per unverified winner, keeping the cheapest.
pub fn construct_audit(
    ctx: &AuditContext,
    lower: &BoundVector,
    upper: &BoundVector,
    w_prime: &BTreeSet<CandidateId>,
    base: &CandidateAudit,
    unverified: &BTreeSet<CandidateId>,
) -> ConstructResult {
    let key = (lower.clone(), upper.clone());
    if let Some(hit) = ctx
        .construct_cache
        .lock()
        .expect("construct lock")
        .get(&key)
    {
        return hit.clone();
    }
    let result = construct_audit_uncached(ctx, lower, upper, w_prime, base, unverified);
    ctx.construct_cache
        .lock()
        .expect("construct lock")
        .insert(key, result.clone());
    result
}

fn construct_audit_uncached(
    ctx: &AuditContext,
    lower: &BoundVector,
    upper: &BoundVector,
    w_prime: &BTreeSet<CandidateId>,
    base: &CandidateAudit,
    unverified: &BTreeSet<CandidateId>,
) -> ConstructResult {
    let fallback = base.clone();

    // Validate every positive lower bound.
    let mut bound_assertions: Vec<PricedAssertion> = Vec::new();
    for (&w, &bound) in &lower.values {
        if bound == Decimal::ZERO {
            continue;
        }
        match ctx.pricer.price(&Assertion::lt(w, bound).expect("unit bound")) {
            Some(priced) => bound_assertions.push(priced),
            None => return (None, fallback),
        }
    }
    // Validate every upper bound below the theoretical cap.
    for (&w, &bound) in &upper.values {
        if bound == ctx.tau_cap {
            continue;
        }
        match ctx.pricer.price(&Assertion::ut(w, bound).expect("unit bound")) {
            Some(priced) => bound_assertions.push(priced),
            None => return (None, fallback),
        }
    }

    let bounds = TransferBounds::new(lower.values.clone(), upper.values.clone(), ctx.tau_cap)
        .expect("search vectors are valid bounds");

    let mut route_assertions: Vec<PricedAssertion> = Vec::new();
    let mut newly_verified: BTreeSet<CandidateId> = BTreeSet::new();
    for &r in unverified {
        let ag_support = auditable_ag_star(ctx, r, &bounds);
        let routes = [
            verify_vo1(ctx, &ag_support),
            verify_vo2(ctx, r, &bounds, &ag_support),
            verify_vo3(ctx, r, &bounds, &ag_support),
        ];
        let cheapest = routes
            .into_iter()
            .flatten()
            .min_by_key(|set| asn_of_set(set.iter().map(|p| &p.asn)).value);
        if let Some(set) = cheapest {
            route_assertions.extend(set);
            newly_verified.insert(r);
        }
    }

    let assemble = |verified_r: &BTreeSet<CandidateId>| -> CandidateAudit {
        let mut audit = base.clone();
        audit.extend(bound_assertions.iter().cloned());
        audit.extend(route_assertions.iter().cloned());
        audit.verified = w_prime.union(verified_r).copied().collect();
        audit
    };

    if unverified.is_empty() {
        let audit = assemble(&BTreeSet::new());
        return (Some(audit.clone()), audit);
    }
    if newly_verified.is_empty() {
        return (None, fallback);
    }
    let partial = assemble(&newly_verified);
    let full = (newly_verified == *unverified).then(|| partial.clone());
    (full, partial)
}

/// All auditable `AG*(r, l, W', bounds)` assertions against the reported
/// losers, keyed by loser.
fn auditable_ag_star(
    ctx: &AuditContext,
    r: CandidateId,
    bounds: &TransferBounds,
) -> BTreeMap<CandidateId, PricedAssertion> {
    ctx.outcome
        .losers
        .iter()
        .filter_map(|&l| {
            let ag = Assertion::ag_star(r, l, bounds.clone()).expect("r is not a loser");
            ctx.pricer.price(&ag).map(|p| (l, p))
        })
        .collect()
}

/// Route 1: `r` beats every reported loser directly by `AG*`.
pub fn verify_vo1(
    ctx: &AuditContext,
    ag_support: &BTreeMap<CandidateId, PricedAssertion>,
) -> Option<Vec<PricedAssertion>> {
    if ag_support.len() == ctx.outcome.losers.len() {
        Some(ag_support.values().cloned().collect())
    } else {
        None
    }
}

/// Route 2: cover every reported loser with an `NL*`, iterating to a fixed
/// point: each pass may assume the elimination of everyone beaten by an
/// earlier `AG*` or `NL*`. Succeeds only when all losers are covered; the
/// result carries the supporting `AG*` assertions as well.
pub fn verify_vo2(
    ctx: &AuditContext,
    r: CandidateId,
    bounds: &TransferBounds,
    ag_support: &BTreeMap<CandidateId, PricedAssertion>,
) -> Option<Vec<PricedAssertion>> {
    let mut covered: BTreeMap<CandidateId, PricedAssertion> = BTreeMap::new();
    loop {
        let beaten: BTreeSet<CandidateId> = ag_support
            .keys()
            .chain(covered.keys())
            .copied()
            .collect();
        let mut progressed = false;
        for &l in &ctx.outcome.losers {
            if covered.contains_key(&l) {
                continue;
            }
            let mut assumed_out = beaten.clone();
            assumed_out.remove(&l);
            let nl = Assertion::nl_star(r, l, bounds.clone(), assumed_out)
                .expect("assumed-out set excludes r, l and W'");
            if let Some(priced) = ctx.pricer.price(&nl) {
                covered.insert(l, priced);
                progressed = true;
            }
        }
        if !progressed {
            break;
        }
    }
    if covered.len() == ctx.outcome.losers.len() {
        let mut out: Vec<PricedAssertion> = covered.into_values().collect();
        out.extend(ag_support.values().cloned());
        Some(out)
    } else {
        None
    }
}

/// Route 3: one `IQX` for `r` assuming the `AG*`-beaten losers eliminated,
/// carried together with those supporting `AG*` assertions.
pub fn verify_vo3(
    ctx: &AuditContext,
    r: CandidateId,
    bounds: &TransferBounds,
    ag_support: &BTreeMap<CandidateId, PricedAssertion>,
) -> Option<Vec<PricedAssertion>> {
    let beaten: BTreeSet<CandidateId> = ag_support.keys().copied().collect();
    let iqx = Assertion::iqx(r, bounds.clone(), beaten).expect("beaten set excludes r and W'");
    let priced = ctx.pricer.price(&iqx)?;
    let mut out = vec![priced];
    out.extend(ag_support.values().cloned());
    Some(out)
}

/// Runs both strategies and selects the final plan: the cheaper full audit
/// when both strategies produce one (straight-IQX on ties), the sole full
/// audit when only one does, otherwise the dual-loop partial (or none).
pub fn plan_audit(
    election: &Election,
    outcome: &TabulationOutcome,
    params: &AuditParams,
) -> AuditPlan {
    let ctx = AuditContext::new(election, outcome, params);
    let straight = straight_iqx_audit(&ctx);
    let dual = dual_loop_audit(&ctx);
    match (straight, dual) {
        (Some(s), d) if d.kind == PlanKind::Full => {
            if d.asn.value < s.asn.value {
                d
            } else {
                s
            }
        }
        (Some(s), _) => s,
        (None, d) => d,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabulation::tabulate;
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

    fn id(e: &Election, name: &str) -> CandidateId {
        e.candidate_by_name(name).unwrap()
    }

    fn quick_params() -> AuditParams {
        let mut p = AuditParams::default();
        p.risk.reps = 5;
        p.precision = 3;
        p
    }

    #[test]
    fn neighbour_generation() {
        let e = Election::parse(TABLE1).unwrap();
        let (c, ee) = (id(&e, "C"), id(&e, "E"));
        let delta = dec("0.005");
        let cap = tau_max(3);

        let lower = BoundVector {
            kind: BoundKind::Lower,
            values: [(c, dec("0.39")), (ee, dec("0.12"))].into_iter().collect(),
        };
        let out = neighbours(&lower, delta, cap);
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].values[&c], dec("0.385"));
        assert_eq!(out[0].values[&ee], dec("0.12"));
        assert_eq!(out[1].values[&c], dec("0.39"));
        assert_eq!(out[1].values[&ee], dec("0.115"));

        let zeroed = BoundVector {
            kind: BoundKind::Lower,
            values: [(c, Decimal::ZERO)].into_iter().collect(),
        };
        assert!(neighbours(&zeroed, delta, cap).is_empty());

        let upper = BoundVector {
            kind: BoundKind::Upper,
            values: [(c, dec("0.748"))].into_iter().collect(),
        };
        let out = neighbours(&upper, delta, cap);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].values[&c], dec("0.75"));
        let capped = BoundVector {
            kind: BoundKind::Upper,
            values: [(c, dec("0.75"))].into_iter().collect(),
        };
        assert!(neighbours(&capped, delta, cap).is_empty());
    }

    #[test]
    fn plan_order_prefers_winners_then_cost() {
        use AsnValue::Ballots;
        assert!(plan_improves(2, Ballots(400), 1, Ballots(50)));
        assert!(plan_improves(2, Ballots(300), 2, Ballots(400)));
        assert!(!plan_improves(2, Ballots(400), 2, Ballots(400)));
        assert!(!plan_improves(1, Ballots(10), 2, Ballots(400)));
        assert!(plan_improves(1, Ballots(10), 1, AsnValue::Infeasible));
    }

    #[test]
    fn straight_iqx_on_the_worked_example() {
        let e = Election::parse(TABLE1).unwrap();
        let params = quick_params();
        let outcome = tabulate(&e, params.precision);
        let ctx = AuditContext::new(&e, &outcome, &params);
        let plan = straight_iqx_audit(&ctx).expect("full straight plan");
        assert_eq!(plan.kind, PlanKind::Full);
        assert_eq!(plan.strategy, Strategy::StraightIqx);
        assert_eq!(
            plan.verified_winners,
            [id(&e, "A"), id(&e, "C"), id(&e, "E")].into_iter().collect()
        );
        // Every winner carries an IQX assertion; A's assumes B eliminated.
        let iqx_subjects: BTreeMap<CandidateId, &Assertion> = plan
            .assertions
            .iter()
            .filter(|p| matches!(p.assertion, Assertion::Iqx { .. }))
            .map(|p| (p.assertion.subject(), &p.assertion))
            .collect();
        assert_eq!(iqx_subjects.len(), 3);
        let a_iqx = iqx_subjects[&id(&e, "A")];
        assert!(a_iqx.eliminated().unwrap().contains(&id(&e, "B")));
        assert!(plan.asn.value.ballots().is_some());
    }

    #[test]
    fn dual_loop_on_the_worked_example() {
        let e = Election::parse(TABLE1).unwrap();
        let params = quick_params();
        let outcome = tabulate(&e, params.precision);
        let ctx = AuditContext::new(&e, &outcome, &params);
        let plan = dual_loop_audit(&ctx);
        // C and E verify by IQ; the loops must also verify A, giving a full
        // audit (A's straight-IQX tally is far above quota, so routes exist).
        assert_eq!(plan.strategy, Strategy::DualLoop);
        assert_eq!(plan.kind, PlanKind::Full);
        assert!(plan
            .assertions
            .iter()
            .any(|p| matches!(p.assertion, Assertion::Iq { .. })));
        // The final audit never exceeds the per-assertion budget.
        for priced in &plan.assertions {
            assert!(priced.asn.value.ballots().unwrap() <= params.risk.max_sample);
        }
    }

    #[test]
    fn plan_audit_prefers_the_cheaper_full_audit() {
        let e = Election::parse(TABLE1).unwrap();
        let params = quick_params();
        let outcome = tabulate(&e, params.precision);
        let plan = plan_audit(&e, &outcome, &params);
        assert_eq!(plan.kind, PlanKind::Full);
        let ctx = AuditContext::new(&e, &outcome, &params);
        let straight = straight_iqx_audit(&ctx).unwrap();
        let dual = dual_loop_audit(&ctx);
        let best = if dual.kind == PlanKind::Full && dual.asn.value < straight.asn.value {
            dual
        } else {
            straight
        };
        assert_eq!(plan.strategy, best.strategy);
        assert_eq!(plan.asn.value, best.asn.value);
    }

    #[test]
    fn no_first_round_winner_means_no_dual_loop() {
        // Quota 4 with flat first preferences: nobody wins round one, and
        // the late winners' IQX tallies stay short, so no audit forms.
        let e = Election::parse("candidates: A,B,C\nseats: 2\n3 : A,B\n3 : B,C\n3 : C,A\n")
            .unwrap();
        let params = quick_params();
        let outcome = tabulate(&e, params.precision);
        let ctx = AuditContext::new(&e, &outcome, &params);
        assert!(outcome.first_round_winners.is_empty());
        let dual = dual_loop_audit(&ctx);
        assert_eq!(dual.kind, PlanKind::None);
        assert!(dual.assertions.is_empty());
        let plan = plan_audit(&e, &outcome, &params);
        assert_eq!(plan.kind, PlanKind::None);
    }

    #[test]
    fn all_winners_on_first_preferences_short_circuits() {
        let e = Election::parse(
            "candidates: A,B,C\nseats: 2\n40 : A\n35 : B\n5 : C\n",
        )
        .unwrap();
        let params = quick_params();
        let outcome = tabulate(&e, params.precision);
        assert_eq!(outcome.first_round_winners.len(), 2);
        let ctx = AuditContext::new(&e, &outcome, &params);
        let dual = dual_loop_audit(&ctx);
        assert_eq!(dual.kind, PlanKind::Full);
        assert_eq!(dual.assertions.len(), 2);
        assert!(dual
            .assertions
            .iter()
            .all(|p| matches!(p.assertion, Assertion::Iq { .. })));
    }

    #[test]
    fn construct_audit_with_nothing_left_to_verify() {
        let e = Election::parse(TABLE1).unwrap();
        let params = quick_params();
        let outcome = tabulate(&e, params.precision);
        let ctx = AuditContext::new(&e, &outcome, &params);
        let iq = auditable_iq(&ctx);
        let w_prime: BTreeSet<CandidateId> = iq.keys().copied().collect();
        let mut base = CandidateAudit::new();
        base.extend(iq.values().cloned());
        base.verified = w_prime.clone();
        let lower = BoundVector {
            kind: BoundKind::Lower,
            values: w_prime.iter().map(|&w| (w, Decimal::ZERO)).collect(),
        };
        let upper = BoundVector {
            kind: BoundKind::Upper,
            values: w_prime.iter().map(|&w| (w, ctx.tau_cap())).collect(),
        };
        let (full, partial) =
            construct_audit(&ctx, &lower, &upper, &w_prime, &base, &BTreeSet::new());
        // Zero lower bounds and at-cap upper bounds need no LT/UT at all.
        let full = full.expect("full audit");
        assert_eq!(&full, &partial);
        assert_eq!(full.assertions.len(), base.assertions.len());
    }

    #[test]
    fn construct_audit_falls_back_when_lower_bounds_fail() {
        let e = Election::parse(TABLE1).unwrap();
        let params = quick_params();
        let outcome = tabulate(&e, params.precision);
        let ctx = AuditContext::new(&e, &outcome, &params);
        let iq = auditable_iq(&ctx);
        let w_prime: BTreeSet<CandidateId> = iq.keys().copied().collect();
        let mut base = CandidateAudit::new();
        base.extend(iq.values().cloned());
        base.verified = w_prime.clone();
        // A lower bound above the reported transfer value makes LT false.
        let lower = BoundVector {
            kind: BoundKind::Lower,
            values: w_prime.iter().map(|&w| (w, dec("0.7"))).collect(),
        };
        let upper = BoundVector {
            kind: BoundKind::Upper,
            values: w_prime.iter().map(|&w| (w, ctx.tau_cap())).collect(),
        };
        let unverified: BTreeSet<CandidateId> = [id(&e, "A")].into_iter().collect();
        let (full, partial) =
            construct_audit(&ctx, &lower, &upper, &w_prime, &base, &unverified);
        assert!(full.is_none());
        assert_eq!(partial.verified(), &w_prime);
        assert!(partial
            .assertions()
            .all(|p| matches!(p.assertion, Assertion::Iq { .. })));
    }

    #[test]
    fn vo2_chains_through_two_iterations() {
        // r beats l3 outright. Removing l3 frees enough of r's support to
        // beat l2; removing both is needed to beat l1. Vo2 must iterate.
        let content = "\
candidates: R,L1,L2,L3,X
seats: 2
100 : R
60 : L3,R
120 : L2,R
200 : L1
200 : X
";
        let e = Election::parse(content).unwrap();
        let (r, l1, l2, l3) = (id(&e, "R"), id(&e, "L1"), id(&e, "L2"), id(&e, "L3"));
        let mut params = quick_params();
        params.risk.max_sample = 2500;
        let outcome = tabulate(&e, params.precision);
        // X wins on first preferences; R is the second winner.
        assert!(outcome.is_winner(r));
        assert_eq!(
            outcome.losers,
            [l1, l2, l3].into_iter().collect::<BTreeSet<_>>()
        );
        let ctx = AuditContext::new(&e, &outcome, &params);
        let bounds = TransferBounds::empty();
        let ag = auditable_ag_star(&ctx, r, &bounds);
        // Only AG*(R, L3) holds: 100 > 60, but 100 < 120 and 100 < 200.
        assert_eq!(ag.keys().copied().collect::<Vec<_>>(), vec![l3]);
        assert!(verify_vo1(&ctx, &ag).is_none());
        let set = verify_vo2(&ctx, r, &bounds, &ag).expect("vo2 succeeds");
        let nl_for = |l: CandidateId| {
            set.iter()
                .find_map(|p| match &p.assertion {
                    Assertion::NlStar { loser, eliminated, .. } if *loser == l => {
                        Some(eliminated.clone())
                    }
                    _ => None,
                })
                .expect("nl* present")
        };
        // First pass: NL*(R, L2, {L3}) gives 160 > 120. L1 needs the second
        // pass with {L2, L3} assumed out: 280 > 200.
        assert_eq!(nl_for(l2), [l3].into_iter().collect::<BTreeSet<_>>());
        assert_eq!(nl_for(l1), [l2, l3].into_iter().collect::<BTreeSet<_>>());
        // The supporting AG* rides along.
        assert!(set
            .iter()
            .any(|p| matches!(p.assertion, Assertion::AgStar { .. })));
    }

    #[test]
    fn vo3_forms_iqx_with_beaten_losers() {
        let e = Election::parse(TABLE1).unwrap();
        let params = quick_params();
        let outcome = tabulate(&e, params.precision);
        let ctx = AuditContext::new(&e, &outcome, &params);
        let a = id(&e, "A");
        let bounds = TransferBounds::empty();
        let ag = auditable_ag_star(&ctx, a, &bounds);
        let set = verify_vo3(&ctx, a, &bounds, &ag).expect("vo3 succeeds");
        let iqx = set
            .iter()
            .find(|p| matches!(p.assertion, Assertion::Iqx { .. }))
            .unwrap();
        assert!(iqx.assertion.eliminated().unwrap().contains(&id(&e, "B")));
    }

    #[test]
    fn cheapest_route_is_selected() {
        let e = Election::parse(TABLE1).unwrap();
        let params = quick_params();
        let outcome = tabulate(&e, params.precision);
        let ctx = AuditContext::new(&e, &outcome, &params);
        let a = id(&e, "A");
        let iq = auditable_iq(&ctx);
        let w_prime: BTreeSet<CandidateId> = iq.keys().copied().collect();
        let lower = BoundVector {
            kind: BoundKind::Lower,
            values: w_prime.iter().map(|&w| (w, dec("0.1"))).collect(),
        };
        let upper = BoundVector {
            kind: BoundKind::Upper,
            values: w_prime.iter().map(|&w| (w, dec("0.45"))).collect(),
        };
        let bounds =
            TransferBounds::new(lower.values.clone(), upper.values.clone(), ctx.tau_cap())
                .unwrap();
        let ag = auditable_ag_star(&ctx, a, &bounds);
        let routes = [
            verify_vo1(&ctx, &ag),
            verify_vo2(&ctx, a, &bounds, &ag),
            verify_vo3(&ctx, a, &bounds, &ag),
        ];
        let costs: Vec<Option<AsnValue>> = routes
            .iter()
            .map(|r| {
                r.as_ref()
                    .map(|set| asn_of_set(set.iter().map(|p| &p.asn)).value)
            })
            .collect();
        let best = costs.iter().flatten().min().copied().unwrap();
        let mut base = CandidateAudit::new();
        base.extend(iq.values().cloned());
        base.verified = w_prime.clone();
        let unverified: BTreeSet<CandidateId> = [a].into_iter().collect();
        let (full, _) = construct_audit(&ctx, &lower, &upper, &w_prime, &base, &unverified);
        let full = full.expect("full audit");
        // The route assertions in the final audit cost exactly what the
        // cheapest stand-alone route costs.
        let route_cost = full
            .assertions()
            .filter(|p| {
                !matches!(
                    p.assertion,
                    Assertion::Iq { .. } | Assertion::Lt { .. } | Assertion::Ut { .. }
                )
            })
            .map(|p| p.asn.value)
            .max()
            .unwrap();
        assert_eq!(route_cost, best);
    }

    #[test]
    fn params_validate_delta_precision() {
        let mut p = AuditParams::default();
        p.precision = 3;
        p.delta = dec("0.005");
        assert!(p.validate().is_ok());
        p.delta = dec("0.0005");
        assert!(p.validate().is_err());
        p.delta = Decimal::ZERO;
        assert!(p.validate().is_err());
    }
}
