//! Noise mechanisms, zCDP calibration, seeded randomness and the budget
//! ledger.
//!
//! Continuous noise is sampled with plain floating-point inverse-CDF and
//! Box-Muller transforms. These samplers are not hardened against
//! floating-point side channels.

use std::fmt;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Deterministic random source seeded from a 64-bit value.
#[derive(Clone, Debug)]
pub struct RandomStream(ChaCha8Rng);

impl RandomStream {
    pub fn from_seed(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Stream for one shadow run, independent of execution order.
    pub fn for_run(master_seed: u64, world: &str, run: u64) -> Self {
        Self::from_seed(derive_seed(master_seed, world, run))
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.0.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.0.try_fill_bytes(dest)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a master seed, a label and an index into a child seed.
pub fn derive_seed(master: u64, label: &str, index: u64) -> u64 {
    let mut h = splitmix64(master);
    for b in label.bytes() {
        h = splitmix64(h ^ u64::from(b));
    }
    splitmix64(h ^ splitmix64(index))
}

/// Uniform draw in `(0, 1]`.
fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.gen::<f64>()
}

/// One draw from the zero-centred Laplace distribution with the given scale.
pub fn laplace<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> Result<f64> {
    if !(scale > 0.0) {
        return Err(Error::invalid(format!("laplace scale must be positive, got {scale}")));
    }
    Ok(sample_laplace(scale, rng))
}

pub(crate) fn sample_laplace<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> f64 {
    loop {
        let u = rng.gen::<f64>() - 0.5;
        if u > -0.5 {
            return -scale * u.signum() * (1.0 - 2.0 * u.abs()).ln();
        }
    }
}

/// Integer noise with `P(k) ∝ α^|k|`, `α = exp(-eps / sensitivity)`.
pub fn two_sided_geometric<R: Rng + ?Sized>(eps: f64, sensitivity: u32, rng: &mut R) -> Result<i64> {
    if !(eps > 0.0) || sensitivity == 0 {
        return Err(Error::invalid(format!(
            "geometric noise needs eps > 0 and sensitivity >= 1, got ({eps}, {sensitivity})"
        )));
    }
    let rate = eps / f64::from(sensitivity);
    // difference of two one-sided geometric variables on {0, 1, ...}
    let one_sided = |rng: &mut R| (-open_unit(rng).ln() / rate).floor() as i64;
    let a = one_sided(rng);
    let b = one_sided(rng);
    Ok(a - b)
}

pub fn gaussian<R: Rng + ?Sized>(sigma: f64, rng: &mut R) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::invalid(format!("gaussian sigma must be positive, got {sigma}")));
    }
    Ok(sigma * standard_normal(rng))
}

pub(crate) fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1 = open_unit(rng);
    let u2 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Samples an index with probability proportional to `exp(log_weights[i])`.
/// Entries equal to `-inf` are never chosen.
pub(crate) fn sample_log_weights<R: Rng + ?Sized>(log_weights: &[f64], rng: &mut R) -> Option<usize> {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return None;
    }
    let weights: Vec<f64> = log_weights.iter().map(|&w| (w - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    let mut target = rng.gen::<f64>() * total;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            if target < w {
                return Some(i);
            }
            target -= w;
            last = i;
        }
    }
    Some(last)
}

/// Exponential mechanism: `P(i) ∝ exp(eps·score_i / (2·sensitivity))`.
pub fn exponential_mechanism<R: Rng + ?Sized>(
    scores: &[f64],
    sensitivity: f64,
    eps: f64,
    rng: &mut R,
) -> Result<usize> {
    if scores.is_empty() {
        return Err(Error::invalid("exponential mechanism needs at least one candidate"));
    }
    if !(sensitivity > 0.0) || !(eps >= 0.0) {
        return Err(Error::invalid(format!(
            "exponential mechanism needs sensitivity > 0 and eps >= 0, got ({sensitivity}, {eps})"
        )));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::invalid("exponential mechanism scores must be finite"));
    }
    let factor = eps / (2.0 * sensitivity);
    let log_weights: Vec<f64> = scores.iter().map(|s| factor * s).collect();
    Ok(sample_log_weights(&log_weights, rng).expect("finite scores"))
}

/// zCDP parameter `ρ` whose conversion `ρ + 2·sqrt(ρ·ln(1/δ))` equals `eps`.
pub fn zcdp_rho(eps: f64, delta: f64) -> Result<f64> {
    if !(eps > 0.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!(
            "(eps, delta) must satisfy eps > 0 and 0 < delta < 1, got ({eps}, {delta})"
        )));
    }
    let l = (1.0 / delta).ln();
    let root = (l + eps).sqrt() - l.sqrt();
    Ok(root * root)
}

pub fn eps_from_rho(rho: f64, delta: f64) -> f64 {
    rho + 2.0 * (rho * (1.0 / delta).ln()).sqrt()
}

/// Noise scale for a Gaussian measurement of the given L2 sensitivity
/// under zCDP budget `rho`.
pub fn sigma_for_rho(rho: f64, l2_sensitivity: f64, num_measurements: u32) -> f64 {
    l2_sensitivity * (f64::from(num_measurements) / (2.0 * rho)).sqrt()
}

/// Noise scale such that `num_measurements` Gaussian measurements compose to
/// `(eps, delta)`-DP through zCDP.
pub fn gaussian_sigma_for(eps: f64, delta: f64, l2_sensitivity: f64, num_measurements: u32) -> Result<f64> {
    if !(l2_sensitivity > 0.0) || num_measurements == 0 {
        return Err(Error::invalid("gaussian calibration needs positive sensitivity and at least one measurement"));
    }
    let rho = zcdp_rho(eps, delta)?;
    if !(rho > 0.0) {
        return Err(Error::invalid(format!("no positive sigma achieves eps={eps}, delta={delta}")));
    }
    let mut sigma = sigma_for_rho(rho, l2_sensitivity, num_measurements);
    // rounding in the closed form can overshoot eps by an ulp or two
    let spent = |s: f64| {
        let r = f64::from(num_measurements) * l2_sensitivity * l2_sensitivity / (2.0 * s * s);
        eps_from_rho(r, delta)
    };
    while spent(sigma) > eps {
        sigma *= 1.0 + 1e-12;
    }
    Ok(sigma)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Extract,
    Discretize,
    Model,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Extract => "extract",
            Stage::Discretize => "discretize",
            Stage::Model => "model",
        })
    }
}

/// Configured per-stage budgets of one pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivacyBudget {
    pub eps_extract: f64,
    pub eps_disc: f64,
    pub eps_model: f64,
    pub delta: f64,
}

impl PrivacyBudget {
    /// Pre-processing budget is split evenly between extraction and
    /// discretization when the domain is extracted with DP; otherwise the
    /// discretizer receives all of it.
    pub fn split(eps_pre: f64, eps_model: f64, delta: f64, dp_extraction: bool) -> Result<Self> {
        if !(eps_pre >= 0.0) || !(eps_model >= 0.0) || !(0.0..1.0).contains(&delta) {
            return Err(Error::invalid(format!(
                "invalid budget eps_pre={eps_pre}, eps_model={eps_model}, delta={delta}"
            )));
        }
        let (eps_extract, eps_disc) = if dp_extraction {
            (eps_pre / 2.0, eps_pre / 2.0)
        } else {
            (0.0, eps_pre)
        };
        Ok(Self {
            eps_extract,
            eps_disc,
            eps_model,
            delta,
        })
    }

    pub fn eps_for(&self, stage: Stage) -> f64 {
        match stage {
            Stage::Extract => self.eps_extract,
            Stage::Discretize => self.eps_disc,
            Stage::Model => self.eps_model,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryKind {
    /// Budget consumed by a mechanism.
    Spent,
    /// Budget allocated to a stage but not consumed.
    Unspent,
    /// Data-dependent step with no DP guarantee.
    Leak,
}

pub const NON_DP_LEAK: &str = "NON-DP LEAK";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub stage: Stage,
    pub mechanism: String,
    #[serde(with = "eps_repr")]
    pub eps: f64,
    pub delta: f64,
    pub kind: EntryKind,
}

/// Infinite eps (the leak sentinel) is written as the string "inf".
mod eps_repr {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Repr::Text(t) => Err(serde::de::Error::custom(format!("bad eps value {t:?}"))),
        }
    }
}

const LEDGER_TOL: f64 = 1e-12;

/// Append-only record of every mechanism invocation in one pipeline run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetLedger {
    budget: PrivacyBudget,
    entries: Vec<LedgerEntry>,
}

impl BudgetLedger {
    pub fn new(budget: PrivacyBudget) -> Self {
        Self {
            budget,
            entries: Vec::new(),
        }
    }

    pub fn budget(&self) -> &PrivacyBudget {
        &self.budget
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    fn push(&mut self, stage: Stage, mechanism: &str, eps: f64, delta: f64, kind: EntryKind) -> Result<()> {
        let (eps_total, delta_total) = self.allocated(stage);
        let eps_cap = self.budget.eps_for(stage);
        let delta_cap = if stage == Stage::Model { self.budget.delta } else { 0.0 };
        let tol = |cap: f64| LEDGER_TOL * cap.max(1.0);
        if eps_total + eps > eps_cap + tol(eps_cap) || delta_total + delta > delta_cap + tol(delta_cap) {
            return Err(Error::invalid(format!(
                "{stage} budget exceeded by {mechanism}: eps {} + {eps} > {eps_cap} or delta {} + {delta} > {delta_cap}",
                eps_total, delta_total
            )));
        }
        self.entries.push(LedgerEntry {
            stage,
            mechanism: mechanism.to_owned(),
            eps,
            delta,
            kind,
        });
        Ok(())
    }

    pub fn spend(&mut self, stage: Stage, mechanism: &str, eps: f64, delta: f64) -> Result<()> {
        self.push(stage, mechanism, eps, delta, EntryKind::Spent)
    }

    pub fn unspent(&mut self, stage: Stage, mechanism: &str, eps: f64) -> Result<()> {
        self.push(stage, mechanism, eps, 0.0, EntryKind::Unspent)
    }

    /// Marks a step that reads the data without any privacy guarantee.
    pub fn leak(&mut self, stage: Stage, mechanism: &str) {
        self.entries.push(LedgerEntry {
            stage,
            mechanism: format!("{NON_DP_LEAK}: {mechanism}"),
            eps: f64::INFINITY,
            delta: 0.0,
            kind: EntryKind::Leak,
        });
    }

    /// Spent plus unspent budget for a stage; leak entries are excluded.
    pub fn allocated(&self, stage: Stage) -> (f64, f64) {
        self.sum(|e| e.stage == stage && e.kind != EntryKind::Leak)
    }

    pub fn spent(&self, stage: Stage) -> (f64, f64) {
        self.sum(|e| e.stage == stage && e.kind == EntryKind::Spent)
    }

    fn sum(&self, keep: impl Fn(&LedgerEntry) -> bool) -> (f64, f64) {
        self.entries
            .iter()
            .filter(|e| keep(e))
            .fold((0.0, 0.0), |(a, b), e| (a + e.eps, b + e.delta))
    }

    pub fn has_leak(&self) -> bool {
        self.entries.iter().any(|e| e.kind == EntryKind::Leak)
    }

    /// Checks that every stage allocated exactly its configured budget.
    pub fn verify_complete(&self) -> Result<()> {
        for stage in [Stage::Extract, Stage::Discretize, Stage::Model] {
            let (eps, delta) = self.allocated(stage);
            let want_eps = self.budget.eps_for(stage);
            let want_delta = if stage == Stage::Model { self.budget.delta } else { 0.0 };
            let close = |a: f64, b: f64| (a - b).abs() <= LEDGER_TOL * b.abs().max(1.0);
            if !close(eps, want_eps) || !close(delta, want_delta) {
                return Err(Error::invalid(format!(
                    "{stage} ledger totals (eps {eps}, delta {delta}) differ from configured (eps {want_eps}, delta {want_delta})"
                )));
            }
        }
        Ok(())
    }
}
