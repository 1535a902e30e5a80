//! Private binning of continuous columns and the encode/decode steps around
//! the generative models.
//!
//! Every discretizer receives the column domain, a budget and a bin count
//! `b`, and returns edges whose first and last values are the domain bounds.
//! The budget of the discretization stage is split evenly across columns.

mod kmeans;
mod privtree;
mod quantile;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dp::{BudgetLedger, Stage};
use crate::error::{Error, Result};
use crate::table::{BinEdges, ColumnDomain, DiscreteTable, Domain, Table};

pub use kmeans::{kmeans_edges, KMeansEdges};
pub use privtree::{privtree_edges, privtree_noise_scale};
pub use quantile::{dp_quantile, quantile_edges};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiscretizerKind {
    Uniform,
    Quantile,
    Kmeans,
    Privtree,
}

impl DiscretizerKind {
    pub const ALL: [DiscretizerKind; 4] = [
        DiscretizerKind::Uniform,
        DiscretizerKind::Quantile,
        DiscretizerKind::Kmeans,
        DiscretizerKind::Privtree,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DiscretizerKind::Uniform => "uniform",
            DiscretizerKind::Quantile => "quantile",
            DiscretizerKind::Kmeans => "kmeans",
            DiscretizerKind::Privtree => "privtree",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscretizerConfig {
    pub kind: DiscretizerKind,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default = "default_kmeans_iters")]
    pub kmeans_iters: usize,
    #[serde(default = "default_privtree_depth")]
    pub privtree_max_depth: u32,
}

fn default_bins() -> usize {
    20
}

fn default_kmeans_iters() -> usize {
    5
}

fn default_privtree_depth() -> u32 {
    20
}

impl DiscretizerConfig {
    pub fn new(kind: DiscretizerKind) -> Self {
        Self {
            kind,
            bins: default_bins(),
            kmeans_iters: default_kmeans_iters(),
            privtree_max_depth: default_privtree_depth(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.bins < 2 {
            return Err(Error::invalid(format!("discretizer needs at least 2 bins, got {}", self.bins)));
        }
        if self.kmeans_iters == 0 {
            return Err(Error::invalid("k-means needs at least one iteration"));
        }
        Ok(())
    }
}

/// `b + 1` equally spaced edges. Data independent.
pub fn uniform_edges(dom: ColumnDomain, b: usize) -> Result<BinEdges> {
    if b == 0 {
        return Err(Error::invalid("uniform edges need at least one bin"));
    }
    let mut edges: Vec<f64> = (0..b).map(|j| dom.lo + dom.width() * j as f64 / b as f64).collect();
    edges.push(dom.hi);
    BinEdges::new(edges)
}

/// Sorts interior cut points, drops anything outside `(lo, hi)` and merges
/// duplicates, then frames them with the domain bounds.
pub(crate) fn assemble_edges(dom: ColumnDomain, mut interior: Vec<f64>) -> Result<BinEdges> {
    interior.retain(|&e| e > dom.lo && e < dom.hi);
    interior.sort_by(f64::total_cmp);
    interior.dedup();
    let mut edges = Vec::with_capacity(interior.len() + 2);
    edges.push(dom.lo);
    edges.extend(interior);
    edges.push(dom.hi);
    BinEdges::new(edges)
}

/// Edges for one column, recording every mechanism call on the ledger.
pub fn column_edges<R: Rng + ?Sized>(
    values: &[f64],
    dom: ColumnDomain,
    cfg: &DiscretizerConfig,
    eps: f64,
    ledger: &mut BudgetLedger,
    rng: &mut R,
) -> Result<BinEdges> {
    let b = cfg.bins;
    if cfg.kind != DiscretizerKind::Uniform && !(eps > 0.0) {
        return Err(Error::invalid(format!("{} discretizer needs eps > 0", cfg.kind.name())));
    }
    match cfg.kind {
        DiscretizerKind::Uniform => {
            ledger.unspent(Stage::Discretize, "uniform", eps)?;
            uniform_edges(dom, b)
        }
        DiscretizerKind::Quantile => {
            let per = eps / b as f64;
            for _ in 1..b {
                ledger.spend(Stage::Discretize, "quantile_exponential", per, 0.0)?;
            }
            ledger.unspent(Stage::Discretize, "quantile_remainder", eps - per * (b - 1) as f64)?;
            quantile_edges(values, b, eps, dom, rng)
        }
        DiscretizerKind::Kmeans => {
            let half = eps / cfg.kmeans_iters as f64 / 2.0;
            for _ in 0..cfg.kmeans_iters {
                ledger.spend(Stage::Discretize, "kmeans_count_geometric", half, 0.0)?;
                ledger.spend(Stage::Discretize, "kmeans_sum_laplace", half, 0.0)?;
            }
            Ok(kmeans_edges(values, b, eps, dom, cfg.kmeans_iters, rng)?.edges)
        }
        DiscretizerKind::Privtree => {
            ledger.spend(Stage::Discretize, "privtree_laplace", eps, 0.0)?;
            privtree_edges(values, b, eps, dom, cfg.privtree_max_depth, rng)
        }
    }
}

/// Edges for every column, with `eps_total / d` per column.
pub fn fit_edges<R: Rng + ?Sized>(
    table: &Table,
    domain: &Domain,
    cfg: &DiscretizerConfig,
    eps_total: f64,
    ledger: &mut BudgetLedger,
    rng: &mut R,
) -> Result<Vec<BinEdges>> {
    cfg.validate()?;
    domain.check_matches(table)?;
    let eps = eps_total / table.n_cols() as f64;
    domain
        .bounds
        .iter()
        .enumerate()
        .map(|(c, &dom)| column_edges(table.column(c), dom, cfg, eps, ledger, rng))
        .collect()
}

/// Maps every value to the bin containing it (values outside the edges are
/// clamped; the upper bound belongs to the last bin).
pub fn discretize(table: &Table, edges: &[BinEdges]) -> Result<DiscreteTable> {
    if edges.len() != table.n_cols() {
        return Err(Error::invalid(format!(
            "{} edge sets for {} columns",
            edges.len(),
            table.n_cols()
        )));
    }
    let columns = table
        .columns()
        .iter()
        .zip(edges)
        .map(|(col, e)| col.iter().map(|&v| e.bin_of(v) as u32).collect())
        .collect();
    let bins = edges.iter().map(BinEdges::n_bins).collect();
    DiscreteTable::new(table.names().to_vec(), columns, bins)
}

/// Draws every cell uniformly inside its bin.
pub fn decode<R: Rng + ?Sized>(dt: &DiscreteTable, edges: &[BinEdges], rng: &mut R) -> Result<Table> {
    if edges.len() != dt.n_cols() {
        return Err(Error::invalid("edge sets do not match the discrete table"));
    }
    let mut columns: Vec<Vec<f64>> = (0..dt.n_cols()).map(|_| Vec::with_capacity(dt.n_rows())).collect();
    for r in 0..dt.n_rows() {
        for (c, e) in edges.iter().enumerate() {
            let (lo, hi) = e.bin_bounds(dt.column(c)[r] as usize);
            columns[c].push(lo + (hi - lo) * rng.gen::<f64>());
        }
    }
    Table::new(dt.names().to_vec(), columns)
}
