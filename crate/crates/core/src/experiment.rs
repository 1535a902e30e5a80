//! Experiment configuration, the cell grid, fingerprints, presets and the
//! resumable runner that writes result files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::discretize::{DiscretizerConfig, DiscretizerKind};
use crate::domain::{provided_domain, DomainStrategy, ExtractionConfig};
use crate::dp::{BudgetLedger, NON_DP_LEAK};
use crate::error::{Error, Result};
use crate::mia::game::{run_shadow_game, GameConfig, RunAudit, ShadowRun};
use crate::mia::{select_target, ForestConfig, TargetMode, TargetSelection};
use crate::pipeline::{GeneratorKind, ModelAudit, PipelineConfig};
use crate::privbayes::PrivBayesConfig;
use crate::table::{direct_range, load_csv, BinEdges, Domain, Table};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub path: PathBuf,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
    #[serde(default = "default_drop")]
    pub drop_columns: Vec<String>,
}

fn default_delimiter() -> char {
    ';'
}

fn default_drop() -> Vec<String> {
    vec!["quality".to_owned()]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsPair {
    pub pre: f64,
    pub model: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiscretizerParams {
    pub bins: usize,
    pub kmeans_iters: usize,
    pub privtree_max_depth: u32,
}

impl Default for DiscretizerParams {
    fn default() -> Self {
        let d = DiscretizerConfig::new(DiscretizerKind::Uniform);
        Self {
            bins: d.bins,
            kmeans_iters: d.kmeans_iters,
            privtree_max_depth: d.privtree_max_depth,
        }
    }
}

/// A full experiment: fixed settings plus the list of values on each grid
/// axis. Every combination of strategy, discretizer, generator and eps pair
/// is one cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default = "default_name")]
    pub name: String,
    pub dataset: DatasetConfig,
    pub strategies: Vec<DomainStrategy>,
    /// Bounds for the provided strategy; defaults to the full dataset's range.
    #[serde(default)]
    pub provided_bounds: Option<Vec<(f64, f64)>>,
    pub discretizers: Vec<DiscretizerKind>,
    #[serde(default)]
    pub discretizer: DiscretizerParams,
    pub generators: Vec<GeneratorKind>,
    #[serde(default)]
    pub privbayes: PrivBayesConfig,
    #[serde(default)]
    pub extraction: ExtractionConfig,
    pub eps: Vec<EpsPair>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_runs")]
    pub n_runs: usize,
    #[serde(default = "default_mode")]
    pub target_mode: TargetMode,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub forest: ForestConfig,
    /// Keep every shadow run's feature vector in the result file.
    #[serde(default)]
    pub dump_features: bool,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_name() -> String {
    "results".to_owned()
}

fn default_delta() -> f64 {
    1e-5
}

fn default_runs() -> usize {
    200
}

fn default_mode() -> TargetMode {
    TargetMode::Outside
}

/// One grid point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub strategy: DomainStrategy,
    pub discretizer: DiscretizerKind,
    pub generator: GeneratorKind,
    pub eps_pre: f64,
    pub eps_model: f64,
}

/// Axis overrides for a sweep. Missing axes keep the base config's values.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub eps_pre: Option<Vec<f64>>,
    pub eps_model: Option<Vec<f64>>,
    pub strategies: Option<Vec<DomainStrategy>>,
    pub discretizers: Option<Vec<DiscretizerKind>>,
    pub generators: Option<Vec<GeneratorKind>>,
}

impl GridSpec {
    fn is_empty(&self) -> bool {
        let axes = [
            self.eps_pre.as_ref().map(Vec::len),
            self.eps_model.as_ref().map(Vec::len),
            self.strategies.as_ref().map(Vec::len),
            self.discretizers.as_ref().map(Vec::len),
            self.generators.as_ref().map(Vec::len),
        ];
        axes.iter().all(Option::is_none) || axes.contains(&Some(0))
    }

    /// The base config with every given axis replaced. A grid with no axes,
    /// or with an empty axis, has no cells.
    pub fn apply(&self, base: &ExperimentConfig) -> ExperimentConfig {
        let mut cfg = base.clone();
        if self.is_empty() {
            cfg.eps.clear();
            return cfg;
        }
        if self.eps_pre.is_some() || self.eps_model.is_some() {
            let pres: Vec<f64> = self
                .eps_pre
                .clone()
                .unwrap_or_else(|| dedup(base.eps.iter().map(|e| e.pre)));
            let models: Vec<f64> = self
                .eps_model
                .clone()
                .unwrap_or_else(|| dedup(base.eps.iter().map(|e| e.model)));
            cfg.eps = pres
                .iter()
                .flat_map(|&pre| models.iter().map(move |&model| EpsPair { pre, model }))
                .collect();
        }
        if let Some(v) = &self.strategies {
            cfg.strategies = v.clone();
        }
        if let Some(v) = &self.discretizers {
            cfg.discretizers = v.clone();
        }
        if let Some(v) = &self.generators {
            cfg.generators = v.clone();
        }
        cfg
    }
}

fn dedup(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for v in values {
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| {
            Error::config(
                format!("line {} column {}", e.line(), e.column()),
                e.to_string(),
            )
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Resolves a relative dataset path against `dir`.
    pub fn resolve_dataset(&mut self, dir: &Path) {
        if self.dataset.path.is_relative() {
            self.dataset.path = dir.join(&self.dataset.path);
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::config(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, got {}", self.schema_version),
            ));
        }
        if !self.dataset.delimiter.is_ascii() {
            return Err(Error::config("dataset.delimiter", "must be a single ASCII character"));
        }
        for (i, e) in self.eps.iter().enumerate() {
            if !(e.pre > 0.0 && e.pre.is_finite()) {
                return Err(Error::config(format!("eps[{i}].pre"), format!("must be positive, got {}", e.pre)));
            }
            if !(e.model > 0.0 && e.model.is_finite()) {
                return Err(Error::config(format!("eps[{i}].model"), format!("must be positive, got {}", e.model)));
            }
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::config("delta", format!("must be in (0, 1), got {}", self.delta)));
        }
        if self.n_runs < 4 {
            return Err(Error::config("n_runs", format!("must be at least 4, got {}", self.n_runs)));
        }
        if self.discretizer.bins < 2 {
            return Err(Error::config("discretizer.bins", "must be at least 2"));
        }
        if self.discretizer.kmeans_iters == 0 {
            return Err(Error::config("discretizer.kmeans_iters", "must be at least 1"));
        }
        if self.privbayes.degree == 0 {
            return Err(Error::config("privbayes.degree", "must be at least 1"));
        }
        if !(self.privbayes.structure_share > 0.0 && self.privbayes.structure_share < 1.0) {
            return Err(Error::config("privbayes.structure_share", "must be in (0, 1)"));
        }
        if self.forest.n_trees == 0 {
            return Err(Error::config("forest.n_trees", "must be at least 1"));
        }
        self.extraction
            .validate()
            .map_err(|e| Error::config("extraction", e.to_string()))?;
        if let Some(bounds) = &self.provided_bounds {
            for (i, &(lo, hi)) in bounds.iter().enumerate() {
                if !(lo < hi) {
                    return Err(Error::config(format!("provided_bounds[{i}]"), format!("need lo < hi, got ({lo}, {hi})")));
                }
            }
        }
        Ok(())
    }

    /// Cells in a fixed order: eps pair, generator, discretizer, strategy.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for e in &self.eps {
            for &generator in &self.generators {
                for &discretizer in &self.discretizers {
                    for &strategy in &self.strategies {
                        out.push(Cell {
                            strategy,
                            discretizer,
                            generator,
                            eps_pre: e.pre,
                            eps_model: e.model,
                        });
                    }
                }
            }
        }
        out
    }

    pub fn pipeline(&self, cell: &Cell, provided: &Domain) -> PipelineConfig {
        PipelineConfig {
            strategy: cell.strategy,
            provided: Some(provided.clone()),
            extraction: self.extraction,
            discretizer: DiscretizerConfig {
                kind: cell.discretizer,
                bins: self.discretizer.bins,
                kmeans_iters: self.discretizer.kmeans_iters,
                privtree_max_depth: self.discretizer.privtree_max_depth,
            },
            generator: cell.generator,
            privbayes: self.privbayes,
            eps_pre: cell.eps_pre,
            eps_model: cell.eps_model,
            delta: self.delta,
        }
    }

    pub fn game(&self) -> GameConfig {
        GameConfig {
            n_runs: self.n_runs,
            master_seed: self.master_seed,
            forest: self.forest,
        }
    }

    /// Preset reproducing one of the four published figure layouts.
    pub fn preset(name: &str, dataset: PathBuf) -> Result<Self> {
        let pair = |pre: f64, model: f64| EpsPair { pre, model };
        let (eps, mode) = match name {
            "figure1" => (vec![pair(1.0, 1.0)], TargetMode::Outside),
            "figure2" => (
                vec![pair(1.0, 100.0), pair(100.0, 1.0), pair(100.0, 100.0)],
                TargetMode::Outside,
            ),
            "figure3" => (
                vec![pair(1.0, 1000.0), pair(1000.0, 1.0), pair(1000.0, 1000.0)],
                TargetMode::Outside,
            ),
            "figure4" => (
                vec![pair(1.0, 1.0), pair(100.0, 100.0), pair(1000.0, 1000.0)],
                TargetMode::Inside,
            ),
            other => return Err(Error::config("preset", format!("unknown preset {other:?}"))),
        };
        Ok(Self {
            schema_version: SCHEMA_VERSION,
            name: name.to_owned(),
            dataset: DatasetConfig {
                path: dataset,
                delimiter: default_delimiter(),
                drop_columns: default_drop(),
            },
            strategies: DomainStrategy::ALL.to_vec(),
            provided_bounds: None,
            discretizers: DiscretizerKind::ALL.to_vec(),
            discretizer: DiscretizerParams::default(),
            generators: GeneratorKind::ALL.to_vec(),
            privbayes: PrivBayesConfig::default(),
            extraction: ExtractionConfig::default(),
            eps,
            delta: default_delta(),
            n_runs: default_runs(),
            target_mode: mode,
            master_seed: 0,
            forest: ForestConfig::default(),
            dump_features: false,
            output_dir: None,
        })
    }

    pub fn load_dataset(&self) -> Result<Table> {
        load_csv(&self.dataset.path, self.dataset.delimiter as u8, &self.dataset.drop_columns)
    }

    /// The provided domain: configured bounds, or the full dataset's range.
    pub fn provided_domain(&self, table: &Table) -> Result<Domain> {
        match &self.provided_bounds {
            Some(bounds) => {
                if bounds.len() != table.n_cols() {
                    return Err(Error::config(
                        "provided_bounds",
                        format!("{} bounds for {} columns", bounds.len(), table.n_cols()),
                    ));
                }
                provided_domain(bounds)
            }
            None => {
                let bounds: Vec<(f64, f64)> = (0..table.n_cols())
                    .map(|c| {
                        let d = direct_range(table, c).0;
                        (d.lo, d.hi)
                    })
                    .collect();
                provided_domain(&bounds)
            }
        }
    }
}

/// Hex SHA-256 of everything that determines a cell's outcome.
pub fn fingerprint(cfg: &ExperimentConfig, cell: &Cell, data_digest: &str) -> Result<String> {
    #[derive(Serialize)]
    struct Key<'a> {
        schema_version: u32,
        data: &'a str,
        delimiter: char,
        drop_columns: &'a [String],
        cell: &'a Cell,
        provided_bounds: &'a Option<Vec<(f64, f64)>>,
        discretizer: &'a DiscretizerParams,
        privbayes: &'a PrivBayesConfig,
        extraction: &'a ExtractionConfig,
        delta: f64,
        n_runs: usize,
        target_mode: TargetMode,
        master_seed: u64,
        forest: &'a ForestConfig,
        dump_features: bool,
    }
    let key = Key {
        schema_version: cfg.schema_version,
        data: data_digest,
        delimiter: cfg.dataset.delimiter,
        drop_columns: &cfg.dataset.drop_columns,
        cell,
        provided_bounds: &cfg.provided_bounds,
        discretizer: &cfg.discretizer,
        privbayes: &cfg.privbayes,
        extraction: &cfg.extraction,
        delta: cfg.delta,
        n_runs: cfg.n_runs,
        target_mode: cfg.target_mode,
        master_seed: cfg.master_seed,
        forest: &cfg.forest,
        dump_features: cfg.dump_features,
    };
    Ok(hex(&Sha256::digest(serde_json::to_vec(&key)?)))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex(&Sha256::digest(&bytes)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub strategy: DomainStrategy,
    pub discretizer: DiscretizerKind,
    pub generator: GeneratorKind,
    pub eps_pre: f64,
    pub eps_model: f64,
    pub auc: Option<f64>,
    pub n_runs: usize,
    pub master_seed: u64,
    pub fingerprint: String,
    pub error: Option<String>,
    /// Ledger of the first run in the `IN` world.
    pub ledger: Option<BudgetLedger>,
    /// Whether every run's ledger balanced against its configured budget.
    pub ledgers_balanced: Option<bool>,
    /// Number of runs whose ledger carries the non-DP leak marker.
    pub leak_runs: usize,
    pub domain: Option<Domain>,
    pub edges: Option<Vec<BinEdges>>,
    pub model: Option<ModelAudit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runs: Option<Vec<ShadowRun>>,
}

impl CellResult {
    pub fn cell(&self) -> Cell {
        Cell {
            strategy: self.strategy,
            discretizer: self.discretizer,
            generator: self.generator,
            eps_pre: self.eps_pre,
            eps_model: self.eps_model,
        }
    }

    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub data_digest: String,
    pub target: TargetSelection,
    pub cells: Vec<CellResult>,
}

impl ResultFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Writes through a temporary file and a rename, so an interrupted
    /// process never leaves a truncated file behind.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    }
}

/// Runs one cell of `cfg` against `data`.
pub fn run_cell(
    cfg: &ExperimentConfig,
    cell: &Cell,
    data: &Table,
    target: &TargetSelection,
    provided: &Domain,
    fingerprint: String,
) -> CellResult {
    let pipeline = cfg.pipeline(cell, provided);
    let mut result = CellResult {
        strategy: cell.strategy,
        discretizer: cell.discretizer,
        generator: cell.generator,
        eps_pre: cell.eps_pre,
        eps_model: cell.eps_model,
        auc: None,
        n_runs: cfg.n_runs,
        master_seed: cfg.master_seed,
        fingerprint,
        error: None,
        ledger: None,
        ledgers_balanced: None,
        leak_runs: 0,
        domain: None,
        edges: None,
        model: None,
        runs: None,
    };
    match run_shadow_game(data, target.index, &pipeline, &cfg.game()) {
        Ok(game) => {
            result.auc = Some(game.auc);
            result.ledgers_balanced = Some(game.audits.iter().all(|a| a.ledger.verify_complete().is_ok()));
            result.leak_runs = game
                .audits
                .iter()
                .filter(|a| a.ledger.entries().iter().any(|e| e.mechanism.starts_with(NON_DP_LEAK)))
                .count();
            if let Some(RunAudit {
                ledger,
                domain,
                edges,
                model,
            }) = game.audits.into_iter().next()
            {
                result.ledger = Some(ledger);
                result.domain = Some(domain);
                result.edges = Some(edges);
                result.model = Some(model);
            }
            if cfg.dump_features {
                result.runs = Some(game.runs);
            }
        }
        Err(e) => result.error = Some(e.to_string()),
    }
    result
}

/// Progress hooks for [`run_experiment`].
pub trait Progress {
    fn cell_started(&mut self, _index: usize, _total: usize, _cell: &Cell) {}
    fn cell_skipped(&mut self, _index: usize, _total: usize, _cell: &Cell) {}
    fn cell_finished(&mut self, _index: usize, _total: usize, _result: &CellResult) {}
}

impl Progress for () {}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Stop after this many newly computed cells (for interruption tests).
    pub max_new_cells: Option<usize>,
}

/// Summary of one invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub computed: usize,
    pub skipped: usize,
    pub failed: usize,
    pub remaining: usize,
}

/// Runs every cell of `cfg`, appending to the result file at `out` after
/// each cell. Cells already present with a matching fingerprint and no
/// error are skipped, so an interrupted run picks up where it stopped.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    out: &Path,
    opts: &RunOptions,
    progress: &mut dyn Progress,
) -> Result<(ResultFile, RunSummary)> {
    cfg.validate()?;
    let cells = cfg.cells();
    let data_digest = file_digest(&cfg.dataset.path)?;
    let data = cfg.load_dataset()?;
    let target = select_target(&data, cfg.target_mode)?;
    let provided = cfg.provided_domain(&data)?;

    let previous = if out.exists() { Some(ResultFile::load(out)?) } else { None };
    let mut done: Vec<CellResult> = previous
        .map(|p| p.cells.into_iter().filter(|c| !c.failed()).collect())
        .unwrap_or_default();

    let mut file = ResultFile {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        data_digest: data_digest.clone(),
        target: target.clone(),
        cells: Vec::with_capacity(cells.len()),
    };
    let mut summary = RunSummary {
        computed: 0,
        skipped: 0,
        failed: 0,
        remaining: 0,
    };
    let total = cells.len();
    for (i, cell) in cells.iter().enumerate() {
        let fp = fingerprint(cfg, cell, &data_digest)?;
        if let Some(pos) = done.iter().position(|c| c.fingerprint == fp) {
            file.cells.push(done.swap_remove(pos));
            summary.skipped += 1;
            progress.cell_skipped(i, total, cell);
            continue;
        }
        if opts.max_new_cells.is_some_and(|m| summary.computed >= m) {
            summary.remaining += 1;
            continue;
        }
        progress.cell_started(i, total, cell);
        let result = run_cell(cfg, cell, &data, &target, &provided, fp);
        summary.computed += 1;
        if result.failed() {
            summary.failed += 1;
        }
        progress.cell_finished(i, total, &result);
        file.cells.push(result);
        file.save(out)?;
    }
    if total == 0 || summary.computed == 0 {
        file.save(out)?;
    }
    Ok((file, summary))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ExperimentConfig {
        ExperimentConfig::preset("figure1", PathBuf::from("data.csv")).unwrap()
    }

    #[test]
    fn presets_have_expected_cells() {
        assert_eq!(base().cells().len(), 24);
        let f2 = ExperimentConfig::preset("figure2", "x".into()).unwrap();
        assert_eq!(f2.cells().len(), 72);
        let f4 = ExperimentConfig::preset("figure4", "x".into()).unwrap();
        assert_eq!(f4.target_mode, TargetMode::Inside);
        assert!(ExperimentConfig::preset("figure9", "x".into()).is_err());
    }

    #[test]
    fn json_round_trip_and_defaults() {
        let cfg = base();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
        let minimal = r#"{"schema_version": 1, "dataset": {"path": "d.csv"}, "strategies": ["dp"],
            "discretizers": ["uniform"], "generators": ["mst"], "eps": [{"pre": 1, "model": 2}]}"#;
        let cfg = ExperimentConfig::from_json(minimal).unwrap();
        assert_eq!(cfg.n_runs, 200);
        assert_eq!(cfg.delta, 1e-5);
        assert_eq!(cfg.discretizer.bins, 20);
        assert_eq!(cfg.dataset.delimiter, ';');
        assert_eq!(cfg.dataset.drop_columns, vec!["quality".to_string()]);
    }

    #[test]
    fn validation_names_the_field() {
        let mut cfg = base();
        cfg.eps[0].model = -1.0;
        match cfg.validate() {
            Err(Error::Config { field, .. }) => assert_eq!(field, "eps[0].model"),
            other => panic!("expected config error, got {other:?}"),
        }
        let bad = r#"{"schema_version": 2}"#;
        assert!(matches!(ExperimentConfig::from_json(bad), Err(Error::Config { .. })));
        let unknown = r#"{"schema_version": 1, "dataset": {"path": "d"}, "strategies": [], "discretizers": [],
            "generators": [], "eps": [], "bogus": 1}"#;
        assert!(ExperimentConfig::from_json(unknown).is_err());
    }

    #[test]
    fn grid_application() {
        let grid = GridSpec {
            eps_pre: Some(vec![1.0, 10.0]),
            eps_model: Some(vec![5.0]),
            strategies: Some(vec![DomainStrategy::Dp]),
            discretizers: Some(vec![DiscretizerKind::Uniform]),
            generators: Some(vec![GeneratorKind::Mst]),
        };
        assert_eq!(grid.apply(&base()).cells().len(), 2);
        assert!(GridSpec::default().apply(&base()).cells().is_empty());
        let empty_axis = GridSpec {
            strategies: Some(vec![]),
            ..GridSpec::default()
        };
        assert!(empty_axis.apply(&base()).cells().is_empty());
    }

    #[test]
    fn fingerprints_differ_per_cell_and_seed() {
        let cfg = base();
        let cells = cfg.cells();
        let a = fingerprint(&cfg, &cells[0], "d").unwrap();
        assert_eq!(a, fingerprint(&cfg, &cells[0], "d").unwrap());
        assert_ne!(a, fingerprint(&cfg, &cells[1], "d").unwrap());
        assert_ne!(a, fingerprint(&cfg, &cells[0], "e").unwrap());
        let mut other = cfg.clone();
        other.master_seed = 1;
        assert_ne!(a, fingerprint(&other, &cells[0], "d").unwrap());
        assert_eq!(a.len(), 64);
    }
}
