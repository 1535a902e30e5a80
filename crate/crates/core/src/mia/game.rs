//! The shadow-model game: synthesize many datasets with and without the
//! target, featurize them, train on half the runs and score the other half.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::auc::auc;
use super::features::naive_features;
use super::forest::{ForestConfig, RandomForest};
use crate::dp::{derive_seed, BudgetLedger, RandomStream};
use crate::error::{Error, Result};
use crate::pipeline::{synthesize, ModelAudit, PipelineConfig};
use crate::table::{BinEdges, Domain, Table};

pub const WORLD_IN: &str = "in";
pub const WORLD_OUT: &str = "out";
const CLASSIFIER_LABEL: &str = "classifier";

/// Accounting and fitted artefacts of one pipeline run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunAudit {
    pub ledger: BudgetLedger,
    pub domain: Domain,
    pub edges: Vec<BinEdges>,
    pub model: ModelAudit,
}

/// One synthetic dataset plus whatever accounting the synthesizer keeps.
pub struct SynthRun {
    pub synthetic: Table,
    pub audit: Option<RunAudit>,
}

/// Anything that turns a training table into a synthetic table.
pub trait Synthesizer: Sync {
    fn run(&self, data: &Table, rng: &mut RandomStream) -> Result<SynthRun>;
}

impl Synthesizer for PipelineConfig {
    fn run(&self, data: &Table, rng: &mut RandomStream) -> Result<SynthRun> {
        let out = synthesize(data, self, rng)?;
        Ok(SynthRun {
            synthetic: out.synthetic,
            audit: Some(RunAudit {
                ledger: out.ledger,
                domain: out.domain,
                edges: out.edges,
                model: out.audit,
            }),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    /// Shadow runs per world.
    pub n_runs: usize,
    pub master_seed: u64,
    pub forest: ForestConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShadowRun {
    pub world_in: bool,
    pub run: usize,
    pub seed: u64,
    pub features: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GameResult {
    pub auc: f64,
    pub n_runs: usize,
    /// Classifier scores and labels on the held-out runs.
    pub test_scores: Vec<f64>,
    pub test_labels: Vec<bool>,
    pub runs: Vec<ShadowRun>,
    /// Audit of every run in `runs` order (empty for stub synthesizers).
    pub audits: Vec<RunAudit>,
}

impl GameResult {
    /// Training (even) and held-out (odd) runs.
    pub fn split(&self) -> (Vec<&ShadowRun>, Vec<&ShadowRun>) {
        self.runs.iter().partition(|r| r.run % 2 == 0)
    }
}

pub fn run_seed(master_seed: u64, world_in: bool, run: usize) -> u64 {
    derive_seed(master_seed, if world_in { WORLD_IN } else { WORLD_OUT }, run as u64)
}

/// Plays the game for the record at `target` of `data`. The `IN` world is
/// `data` itself and the `OUT` world is `data` without the target. Every
/// run draws from its own stream, so results do not depend on scheduling.
pub fn run_shadow_game<S: Synthesizer + ?Sized>(
    data: &Table,
    target: usize,
    synth: &S,
    cfg: &GameConfig,
) -> Result<GameResult> {
    if cfg.n_runs < 4 {
        return Err(Error::invalid(format!("need at least 4 runs per world, got {}", cfg.n_runs)));
    }
    if target >= data.n_rows() {
        return Err(Error::invalid(format!("target {target} out of range")));
    }
    let world_out = data.without_row(target)?;
    let jobs: Vec<(bool, usize)> = [true, false]
        .into_iter()
        .flat_map(|w| (0..cfg.n_runs).map(move |r| (w, r)))
        .collect();
    let outputs: Vec<(ShadowRun, SynthRun)> = jobs
        .par_iter()
        .map(|&(world_in, run)| {
            let seed = run_seed(cfg.master_seed, world_in, run);
            let table = if world_in { data } else { &world_out };
            let out = synth.run(table, &mut RandomStream::from_seed(seed))?;
            let shadow = ShadowRun {
                world_in,
                run,
                seed,
                features: naive_features(&out.synthetic),
            };
            Ok((shadow, out))
        })
        .collect::<Result<_>>()?;

    let mut runs = Vec::with_capacity(outputs.len());
    let mut audits = Vec::new();
    for (shadow, out) in outputs {
        runs.push(shadow);
        audits.extend(out.audit);
    }
    let (auc, test_scores, test_labels) = score(&runs, cfg)?;
    Ok(GameResult {
        auc,
        n_runs: cfg.n_runs,
        test_scores,
        test_labels,
        runs,
        audits,
    })
}

/// Trains on even runs and returns the AUC, scores and labels of odd runs.
pub fn score(runs: &[ShadowRun], cfg: &GameConfig) -> Result<(f64, Vec<f64>, Vec<bool>)> {
    let (train, test): (Vec<&ShadowRun>, Vec<&ShadowRun>) = runs.iter().partition(|r| r.run % 2 == 0);
    let x: Vec<Vec<f64>> = train.iter().map(|r| r.features.clone()).collect();
    let y: Vec<bool> = train.iter().map(|r| r.world_in).collect();
    let mut rng = RandomStream::for_run(cfg.master_seed, CLASSIFIER_LABEL, 0);
    let forest = RandomForest::fit(&x, &y, &cfg.forest, &mut rng).map_err(|e| e.in_stage("classifier"))?;
    let scores: Vec<f64> = test.iter().map(|r| forest.predict(&r.features)).collect();
    let labels: Vec<bool> = test.iter().map(|r| r.world_in).collect();
    Ok((auc(&scores, &labels)?, scores, labels))
}

/// Stub synthesizer for harness checks: fixed data plus per-run noise,
/// ignoring its input entirely.
pub struct ConstantStub {
    pub base: Table,
    pub noise: f64,
}

impl Synthesizer for ConstantStub {
    fn run(&self, _data: &Table, rng: &mut RandomStream) -> Result<SynthRun> {
        let columns = self
            .base
            .columns()
            .iter()
            .map(|c| c.iter().map(|v| v + self.noise * (rng.gen::<f64>() - 0.5)).collect())
            .collect();
        Ok(SynthRun {
            synthetic: Table::new(self.base.names().to_vec(), columns)?,
            audit: None,
        })
    }
}

/// Stub synthesizer that behaves like [`ConstantStub`] but plants the
/// training data's raw per-column maximum into the output.
pub struct LeakyStub(pub ConstantStub);

impl Synthesizer for LeakyStub {
    fn run(&self, data: &Table, rng: &mut RandomStream) -> Result<SynthRun> {
        let mut out = self.0.run(data, rng)?;
        let columns = out
            .synthetic
            .columns()
            .iter()
            .enumerate()
            .map(|(c, col)| {
                let hi = data.column(c).iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let mut col = col.clone();
                col[0] = hi;
                col
            })
            .collect();
        out.synthetic = Table::new(out.synthetic.names().to_vec(), columns)?;
        Ok(out)
    }
}
