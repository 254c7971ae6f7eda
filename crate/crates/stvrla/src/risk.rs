//! ALPHA martingale risk computation and simulation-based sample-size
//! estimation.
//!
//! The martingale tests the null "population mean is at most one half" for
//! samples drawn without replacement from a known population, using the
//! shrink-trunc estimator for the alternative mean. Sample sizes (ASNs) are
//! estimated by repeated simulation: shuffle the ballots, inject one-vote
//! overstatements at a configured rate, and record how many draws the
//! martingale needs before the running p-value reaches the risk limit.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rust_decimal::prelude::ToPrimitive;
use rust_decimal::Decimal;
use serde::Serialize;
use thiserror::Error;

use crate::assertions::{fnv1a_bytes, Assorter};
use crate::ballots::Election;

/// Parameters for risk computation and sample-size estimation.
#[derive(Debug, Clone, PartialEq)]
pub struct AsnParams {
    /// Risk limit, in (0, 1).
    pub risk_limit: f64,
    /// Expected overstatement rate per sampled ballot.
    pub error_rate: f64,
    /// Number of simulation repetitions per assertion.
    pub reps: u32,
    /// Base seed; per-repetition streams are derived from it together with
    /// the repetition index and the assertion identity.
    pub seed: u64,
    /// Largest sample size considered auditable.
    pub max_sample: u64,
    /// Shrink-trunc prior weight.
    pub alpha_d: f64,
    /// Estimator floor clearance; `None` selects `u / (2 * population)`.
    pub alpha_eps: Option<f64>,
}

impl Default for AsnParams {
    fn default() -> Self {
        AsnParams {
            risk_limit: 0.05,
            error_rate: 0.002,
            reps: 20,
            seed: 1,
            max_sample: 2500,
            alpha_d: 100.0,
            alpha_eps: None,
        }
    }
}

impl AsnParams {
    pub fn validate(&self) -> Result<(), RiskError> {
        if !(self.risk_limit > 0.0 && self.risk_limit < 1.0) {
            return Err(RiskError::BadRiskLimit(self.risk_limit));
        }
        if !(0.0..1.0).contains(&self.error_rate) {
            return Err(RiskError::BadErrorRate(self.error_rate));
        }
        if self.reps == 0 {
            return Err(RiskError::NoReps);
        }
        if self.max_sample == 0 {
            return Err(RiskError::NoSampleBudget);
        }
        Ok(())
    }
}

/// Estimated sample size: a ballot count, or infeasible within the budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(untagged)]
pub enum AsnValue {
    Ballots(u64),
    Infeasible,
}

impl AsnValue {
    pub fn is_infeasible(self) -> bool {
        matches!(self, AsnValue::Infeasible)
    }

    pub fn ballots(self) -> Option<u64> {
        match self {
            AsnValue::Ballots(n) => Some(n),
            AsnValue::Infeasible => None,
        }
    }
}

impl std::fmt::Display for AsnValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AsnValue::Ballots(n) => write!(f, "{n}"),
            AsnValue::Infeasible => write!(f, "infeasible"),
        }
    }
}

/// Result of a sample-size estimation: the rounded-up mean over repetitions,
/// plus the per-repetition sample sizes (`None` where a repetition exhausted
/// its budget).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AsnEstimate {
    pub value: AsnValue,
    pub per_rep: Vec<Option<u64>>,
    pub reason: Option<String>,
}

impl AsnEstimate {
    fn infeasible(reps: usize, reason: &str) -> Self {
        AsnEstimate {
            value: AsnValue::Infeasible,
            per_rep: vec![None; reps],
            reason: Some(reason.to_string()),
        }
    }
}

/// Incremental ALPHA martingale over samples in `[0, u]`, drawn without
/// replacement from a population of known size, testing the null that the
/// population mean is at most one half.
#[derive(Debug, Clone)]
pub struct AlphaMartingale {
    u: f64,
    population: f64,
    eta0: f64,
    d: f64,
    eps: f64,
    mart: f64,
    sum: f64,
    drawn: u64,
    state: MartState,
    p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum MartState {
    Live,
    /// Null mean hit zero: the alternative is certain, p stays at zero.
    Proven,
    /// Null mean reached `u`: the test can no longer reject; p is frozen.
    Frozen,
}

impl AlphaMartingale {
    pub fn new(u: f64, population: u64, eta0: f64, params: &AsnParams) -> Self {
        let eps = params
            .alpha_eps
            .unwrap_or(u / (2.0 * population as f64));
        AlphaMartingale {
            u,
            population: population as f64,
            eta0,
            d: params.alpha_d,
            eps,
            mart: 1.0,
            sum: 0.0,
            drawn: 0,
            state: MartState::Live,
            p: 1.0,
        }
    }

    /// Current p-value, `min(1, 1/T)`.
    pub fn p_value(&self) -> f64 {
        self.p
    }

    /// Feeds one sample and returns the updated running p-value.
    pub fn update(&mut self, x: f64) -> f64 {
        self.drawn += 1;
        match self.state {
            MartState::Proven => return 0.0,
            MartState::Frozen => return self.p,
            MartState::Live => {}
        }
        let j = self.drawn as f64;
        // Null mean conditional on what has been drawn so far.
        let mu = (self.population * 0.5 - self.sum) / (self.population - j + 1.0);
        if mu <= 0.0 {
            self.state = MartState::Proven;
            self.p = 0.0;
            return 0.0;
        }
        if mu >= self.u {
            self.state = MartState::Frozen;
            return self.p;
        }
        // Shrink-trunc estimate of the alternative mean.
        let shrink = (self.d * self.eta0 + self.sum) / (self.d + j - 1.0);
        let eta = shrink.max(mu + self.eps).min(self.u - self.eps);
        let factor =
            (x * eta / mu + (self.u - x) * (self.u - eta) / (self.u - mu)) / self.u;
        self.mart *= factor;
        self.sum += x;
        self.p = if self.mart > 1.0 { 1.0 / self.mart } else { 1.0 };
        self.p
    }
}

/// Runs the martingale over a full sample sequence, returning the p-value
/// after each draw. Errors when a sample lies outside `[0, u]`.
pub fn alpha_martingale(
    samples: &[f64],
    u: f64,
    population: u64,
    eta0: f64,
    params: &AsnParams,
) -> Result<Vec<f64>, RiskError> {
    let mut mart = AlphaMartingale::new(u, population, eta0, params);
    let mut out = Vec::with_capacity(samples.len());
    for &x in samples {
        if !(0.0..=u).contains(&x) {
            return Err(RiskError::SampleOutOfRange { value: x, upper: u });
        }
        out.push(mart.update(x));
    }
    Ok(out)
}

fn derive_rep_seed(base_seed: u64, rep: u32, assertion_id: u64) -> u64 {
    let mut bytes = Vec::with_capacity(20);
    bytes.extend_from_slice(&base_seed.to_le_bytes());
    bytes.extend_from_slice(&rep.to_le_bytes());
    bytes.extend_from_slice(&assertion_id.to_le_bytes());
    fnv1a_bytes(&bytes)
}

/// Estimates the sample size needed to confirm an assorter at the configured
/// risk limit. Each repetition shuffles the ballot population, walks it while
/// injecting one-vote overstatements at `error_rate`, and records the first
/// sample size at which the running p-value reaches the risk limit. The
/// estimate is the rounded-up mean; a repetition that exhausts
/// `min(max_sample, population)` makes the whole estimate infeasible.
pub fn estimate_asn(assorter: &Assorter, election: &Election, params: &AsnParams) -> AsnEstimate {
    estimate_asn_seeded(assorter, election, params, assorter.source_id())
}

/// As [`estimate_asn`] with an explicit stream identity, letting callers pin
/// the random streams when comparing estimates across assorters.
pub fn estimate_asn_seeded(
    assorter: &Assorter,
    election: &Election,
    params: &AsnParams,
    stream_id: u64,
) -> AsnEstimate {
    if let Err(e) = params.validate() {
        return AsnEstimate::infeasible(params.reps as usize, &e.to_string());
    }
    if !assorter.reported_mean_exceeds_half() {
        return AsnEstimate::infeasible(params.reps as usize, "non-positive margin");
    }

    let n = assorter.population();
    let n_dec = Decimal::from(n);
    let denom = Decimal::TWO * (assorter.raw_threshold() / n_dec - assorter.raw_floor());
    let u = ((assorter.raw_ceiling() - assorter.raw_floor()) / denom)
        .to_f64()
        .expect("finite upper bound");
    let eta0 = assorter.reported_mean().to_f64().expect("finite mean");

    // Normalized scores per ranking type, honest and overstated.
    let types = election.ballots();
    let mut x_honest = Vec::with_capacity(types.len());
    let mut x_over = Vec::with_capacity(types.len());
    for ballot in types {
        let g = assorter.raw_score(ballot);
        let g_over = (g - Decimal::ONE).max(assorter.raw_floor());
        let norm = |raw: Decimal| -> f64 {
            let x = ((raw - assorter.raw_floor()) / denom)
                .to_f64()
                .expect("finite score");
            x.clamp(0.0, u)
        };
        x_honest.push(norm(g));
        x_over.push(norm(g_over));
    }

    // Expand the compressed multiset into individual ballot type indices.
    let mut population: Vec<u32> = Vec::with_capacity(n as usize);
    for (t, ballot) in types.iter().enumerate() {
        population.extend(std::iter::repeat(t as u32).take(ballot.count as usize));
    }

    let cap = params.max_sample.min(n);
    let mut per_rep: Vec<Option<u64>> = Vec::with_capacity(params.reps as usize);
    for rep in 0..params.reps {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_rep_seed(params.seed, rep, stream_id));
        let mut order = population.clone();
        order.shuffle(&mut rng);
        let mut mart = AlphaMartingale::new(u, n, eta0, params);
        let mut found = None;
        for (i, &t) in order.iter().take(cap as usize).enumerate() {
            let x = if params.error_rate > 0.0 && rng.gen::<f64>() < params.error_rate {
                x_over[t as usize]
            } else {
                x_honest[t as usize]
            };
            let p = mart.update(x);
            if p <= params.risk_limit {
                found = Some(i as u64 + 1);
                break;
            }
        }
        per_rep.push(found);
    }

    if per_rep.iter().any(Option::is_none) {
        return AsnEstimate {
            value: AsnValue::Infeasible,
            per_rep,
            reason: Some(format!("sample budget {cap} exhausted")),
        };
    }
    let total: u64 = per_rep.iter().map(|r| r.unwrap()).sum();
    let reps = params.reps as u64;
    AsnEstimate {
        value: AsnValue::Ballots(total.div_ceil(reps)),
        per_rep,
        reason: None,
    }
}

/// Cost of auditing a set of assertions: the maximum of the members' costs.
/// Infeasible members dominate; the empty set costs zero.
pub fn asn_of_set<'a>(estimates: impl IntoIterator<Item = &'a AsnEstimate>) -> AsnEstimate {
    let mut worst = AsnValue::Ballots(0);
    for est in estimates {
        worst = worst.max(est.value);
    }
    AsnEstimate {
        value: worst,
        per_rep: Vec::new(),
        reason: match worst {
            AsnValue::Infeasible => Some("a member assertion is infeasible".to_string()),
            AsnValue::Ballots(_) => None,
        },
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum RiskError {
    #[error("sample value {value} outside [0, {upper}]")]
    SampleOutOfRange { value: f64, upper: f64 },
    #[error("risk limit {0} outside (0, 1)")]
    BadRiskLimit(f64),
    #[error("error rate {0} outside [0, 1)")]
    BadErrorRate(f64),
    #[error("at least one repetition is required")]
    NoReps,
    #[error("maximum sample size must be positive")]
    NoSampleBudget,
}
