//! MST: Gaussian-measured one-way marginals, a privately selected maximum
//! spanning tree of pairwise mutual information, Gaussian-measured two-way
//! marginals on the tree edges, then exact tree calibration and sampling.
//!
//! The selected marginals always form a tree, so consistent marginals are
//! obtained by fitting every edge table to its two endpoint marginals and
//! sampling from the tree factorization directly.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dp::{self, BudgetLedger, Stage};
use crate::error::{Error, Result};
use crate::marginal::{mi_sensitivity, MiCounter};
use crate::privbayes::draw_from_cdf;
use crate::table::DiscreteTable;

const IPF_ROUNDS: usize = 100;
const IPF_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub bins: Vec<usize>,
    /// `d - 1` attribute pairs `(a, b)` with `a < b`.
    pub edges: Vec<(usize, usize)>,
    pub one_way: Vec<Vec<f64>>,
    /// Row-major `bins[a] × bins[b]` table per edge.
    pub two_way: Vec<Vec<f64>>,
    pub sigma_one_way: f64,
    pub sigma_two_way: f64,
    /// Mass each calibrated marginal is normalized to.
    pub total: f64,
    pub calibrated: bool,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra] = rb;
        true
    }
}

/// Kruskal-order spanning tree where every accepted edge is drawn with the
/// exponential mechanism over the pairs that do not close a cycle.
/// `eps_step == 0` picks uniformly among them.
pub fn select_tree<R: Rng + ?Sized>(
    d: usize,
    weights: &[((usize, usize), f64)],
    sensitivity: f64,
    eps_step: f64,
    rng: &mut R,
) -> Result<Vec<(usize, usize)>> {
    let mut uf = UnionFind::new(d);
    let mut tree = Vec::with_capacity(d.saturating_sub(1));
    while tree.len() + 1 < d {
        let valid: Vec<&((usize, usize), f64)> = weights
            .iter()
            .filter(|((a, b), _)| uf.find(*a) != uf.find(*b))
            .collect();
        let scores: Vec<f64> = valid.iter().map(|(_, w)| *w).collect();
        let pick = dp::exponential_mechanism(&scores, sensitivity, eps_step, rng)?;
        let (a, b) = valid[pick].0;
        uf.union(a, b);
        tree.push((a, b));
    }
    Ok(tree)
}

pub fn is_spanning_tree(d: usize, edges: &[(usize, usize)]) -> bool {
    if edges.len() + 1 != d.max(1) {
        return false;
    }
    let mut uf = UnionFind::new(d);
    edges.iter().all(|&(a, b)| a < d && b < d && uf.union(a, b))
}

fn two_way_counts(dt: &DiscreteTable, a: usize, b: usize) -> Vec<f64> {
    let bb = dt.bins()[b];
    let mut t = vec![0.0; dt.bins()[a] * bb];
    for (&x, &y) in dt.column(a).iter().zip(dt.column(b)) {
        t[x as usize * bb + y as usize] += 1.0;
    }
    t
}

/// Fits the model, recording ledger shares in proportion to the zCDP budget
/// of each third (one-way, selection, two-way).
pub fn fit_mst<R: Rng + ?Sized>(
    dt: &DiscreteTable,
    eps_model: f64,
    delta: f64,
    ledger: &mut BudgetLedger,
    rng: &mut R,
) -> Result<TreeModel> {
    let rho = dp::zcdp_rho(eps_model, delta)?;
    let d = dt.n_cols();
    let n = dt.n_rows();
    if d == 0 {
        return Err(Error::invalid("cannot fit MST without attributes"));
    }
    let bins = dt.bins().to_vec();
    let parts = if d > 1 { 3.0 } else { 1.0 };
    let rho_part = rho / parts;

    ledger.spend(Stage::Model, "mst_oneway_gaussian", eps_model / parts, delta / parts)?;
    let sigma_one_way = dp::sigma_for_rho(rho_part, 1.0, d as u32);
    let one_way: Vec<Vec<f64>> = (0..d)
        .map(|c| {
            let mut counts = vec![0.0; bins[c]];
            for &v in dt.column(c) {
                counts[v as usize] += 1.0;
            }
            counts
                .into_iter()
                .map(|x| x + sigma_one_way * dp::standard_normal(rng))
                .collect()
        })
        .collect();

    if d == 1 {
        return Ok(TreeModel {
            bins,
            edges: Vec::new(),
            one_way,
            two_way: Vec::new(),
            sigma_one_way,
            sigma_two_way: 0.0,
            total: n as f64,
            calibrated: false,
        });
    }

    let mut counter = MiCounter::new(n);
    let mut weights = Vec::with_capacity(d * (d - 1) / 2);
    for a in 0..d {
        for b in a + 1..d {
            let w = counter.mi_bits(dt.column(a), bins[a], dt.column(b), bins[b]);
            weights.push(((a, b), w));
        }
    }
    let steps = (d - 1) as f64;
    let eps_step = (8.0 * rho_part / steps).sqrt();
    for _ in 0..d - 1 {
        ledger.spend(Stage::Model, "mst_select_exponential", eps_model / parts / steps, delta / parts / steps)?;
    }
    let edges = select_tree(d, &weights, mi_sensitivity(n), eps_step, rng)?;

    ledger.spend(Stage::Model, "mst_twoway_gaussian", eps_model / parts, delta / parts)?;
    let sigma_two_way = dp::sigma_for_rho(rho_part, 1.0, (d - 1) as u32);
    let two_way = edges
        .iter()
        .map(|&(a, b)| {
            two_way_counts(dt, a, b)
                .into_iter()
                .map(|x| x + sigma_two_way * dp::standard_normal(rng))
                .collect()
        })
        .collect();

    Ok(TreeModel {
        bins,
        edges,
        one_way,
        two_way,
        sigma_one_way,
        sigma_two_way,
        total: n as f64,
        calibrated: false,
    })
}

fn clip_and_normalize(values: &mut [f64], total: f64) {
    values.iter_mut().for_each(|v| *v = v.max(0.0));
    let sum: f64 = values.iter().sum();
    if sum > 0.0 {
        values.iter_mut().for_each(|v| *v *= total / sum);
    } else {
        let u = total / values.len() as f64;
        values.fill(u);
    }
}

/// Largest absolute gap between the table's row/column sums and the targets.
pub fn margin_residual(table: &[f64], rows: &[f64], cols: &[f64]) -> f64 {
    let nc = cols.len();
    let mut worst: f64 = 0.0;
    for (i, &target) in rows.iter().enumerate() {
        let s: f64 = table[i * nc..(i + 1) * nc].iter().sum();
        worst = worst.max((s - target).abs());
    }
    for (j, &target) in cols.iter().enumerate() {
        let s: f64 = (0..rows.len()).map(|i| table[i * nc + j]).sum();
        worst = worst.max((s - target).abs());
    }
    worst
}

/// Iterative proportional fitting of `table` to the given margins. Rows or
/// columns that run out of mass while their target is positive are refilled
/// in proportion to the opposite margin.
pub fn ipf(table: &mut [f64], rows: &[f64], cols: &[f64]) -> f64 {
    let (nr, nc) = (rows.len(), cols.len());
    let total: f64 = rows.iter().sum();
    let mut residual = margin_residual(table, rows, cols);
    for _ in 0..IPF_ROUNDS {
        if residual < IPF_TOL {
            break;
        }
        for i in 0..nr {
            let row = &mut table[i * nc..(i + 1) * nc];
            let s: f64 = row.iter().sum();
            if s > 0.0 {
                let f = rows[i] / s;
                row.iter_mut().for_each(|v| *v *= f);
            } else if rows[i] > 0.0 {
                for (v, &c) in row.iter_mut().zip(cols) {
                    *v = rows[i] * c / total;
                }
            }
        }
        for j in 0..nc {
            let s: f64 = (0..nr).map(|i| table[i * nc + j]).sum();
            if s > 0.0 {
                let f = cols[j] / s;
                (0..nr).for_each(|i| table[i * nc + j] *= f);
            } else if cols[j] > 0.0 {
                (0..nr).for_each(|i| table[i * nc + j] = cols[j] * rows[i] / total);
            }
        }
        residual = margin_residual(table, rows, cols);
    }
    if residual >= IPF_TOL {
        // near-structural zeros make IPF crawl; settle the leftover row
        // errors by moving mass within columns
        shift_row_mass(table, rows, nc);
        residual = margin_residual(table, rows, cols);
    }
    residual
}

/// Moves mass from rows above their target to rows below it, column by
/// column, so row sums hit `rows` while column sums and signs are kept.
/// Over-full rows give up mass in proportion to their cells; the freed mass
/// of each column is shared among under-full rows by their deficit.
fn shift_row_mass(table: &mut [f64], rows: &[f64], nc: usize) {
    let excess: Vec<f64> = rows
        .iter()
        .enumerate()
        .map(|(i, &target)| table[i * nc..(i + 1) * nc].iter().sum::<f64>() - target)
        .collect();
    let deficit: f64 = excess.iter().filter(|&&e| e < 0.0).map(|e| -e).sum();
    if deficit == 0.0 {
        return;
    }
    let mut freed = vec![0.0; nc];
    for (i, &e) in excess.iter().enumerate() {
        let row = &mut table[i * nc..(i + 1) * nc];
        let s: f64 = row.iter().sum();
        if e > 0.0 && s > 0.0 {
            for (v, f) in row.iter_mut().zip(freed.iter_mut()) {
                let take = e * *v / s;
                *v -= take;
                *f += take;
            }
        }
    }
    for (i, &e) in excess.iter().enumerate() {
        if e < 0.0 {
            let share = -e / deficit;
            for (v, f) in table[i * nc..(i + 1) * nc].iter_mut().zip(&freed) {
                *v += share * f;
            }
        }
    }
}

/// Clips negative mass, normalizes every marginal to the model total, and
/// fits each edge table to its two (already normalized) one-way marginals.
pub fn calibrate(model: &TreeModel) -> TreeModel {
    let mut out = model.clone();
    let total = out.total.max(1.0);
    for m in out.one_way.iter_mut() {
        clip_and_normalize(m, total);
    }
    for (t, &(a, b)) in out.two_way.iter_mut().zip(&out.edges) {
        clip_and_normalize(t, total);
        let (nr, nc) = (out.bins[a], out.bins[b]);
        for i in 0..nr {
            if t[i * nc..(i + 1) * nc].iter().sum::<f64>() == 0.0 {
                t[i * nc..(i + 1) * nc].fill(total / (nr * nc) as f64);
            }
        }
        for j in 0..nc {
            if (0..nr).map(|i| t[i * nc + j]).sum::<f64>() == 0.0 {
                (0..nr).for_each(|i| t[i * nc + j] = total / (nr * nc) as f64);
            }
        }
        let residual = ipf(t, &out.one_way[a], &out.one_way[b]);
        if residual >= IPF_TOL {
            log::debug!("ipf on edge ({a}, {b}) stopped with residual {residual:e}");
        }
    }
    out.total = total;
    out.calibrated = true;
    out
}

/// Worst margin mismatch over all edges of a calibrated model.
pub fn calibration_residual(model: &TreeModel) -> f64 {
    model
        .edges
        .iter()
        .zip(&model.two_way)
        .map(|(&(a, b), t)| margin_residual(t, &model.one_way[a], &model.one_way[b]))
        .fold(0.0, f64::max)
}

/// Samples attribute 0 from its marginal, then walks the tree breadth-first
/// drawing each child from `P(child | parent)` of the connecting edge.
pub fn sample_tree<R: Rng + ?Sized>(
    model: &TreeModel,
    names: &[String],
    n_out: usize,
    rng: &mut R,
) -> Result<DiscreteTable> {
    if !model.calibrated {
        return Err(Error::invalid("sample_tree needs a calibrated model"));
    }
    let d = model.bins.len();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); d];
    for (e, &(a, b)) in model.edges.iter().enumerate() {
        adjacency[a].push(e);
        adjacency[b].push(e);
    }
    // (parent, child, cumulative rows indexed by parent bin)
    let mut plan: Vec<(usize, usize, Vec<Vec<f64>>)> = Vec::new();
    let mut seen = vec![false; d];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(p) = queue.pop_front() {
        for &e in &adjacency[p] {
            let (a, b) = model.edges[e];
            let child = if a == p { b } else { a };
            if seen[child] {
                continue;
            }
            seen[child] = true;
            let t = &model.two_way[e];
            let nc = model.bins[b];
            let rows = (0..model.bins[p])
                .map(|pv| {
                    let probs: Vec<f64> = (0..model.bins[child])
                        .map(|cv| if a == p { t[pv * nc + cv] } else { t[cv * nc + pv] })
                        .collect();
                    cumulative_or_uniform(&probs)
                })
                .collect();
            plan.push((p, child, rows));
            queue.push_back(child);
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::invalid("tree does not reach every attribute"));
    }
    let root_cdf = cumulative_or_uniform(&model.one_way[0]);
    let mut columns = vec![vec![0u32; n_out]; d];
    for r in 0..n_out {
        columns[0][r] = draw_from_cdf(&root_cdf, rng) as u32;
        for (p, child, rows) in &plan {
            let pv = columns[*p][r] as usize;
            columns[*child][r] = draw_from_cdf(&rows[pv], rng) as u32;
        }
    }
    DiscreteTable::new(names.to_vec(), columns, model.bins.clone())
}

fn cumulative_or_uniform(probs: &[f64]) -> Vec<f64> {
    let total: f64 = probs.iter().sum();
    if total > 0.0 {
        probs
            .iter()
            .scan(0.0, |acc, &p| {
                *acc += p;
                Some(*acc)
            })
            .collect()
    } else {
        (1..=probs.len()).map(|i| i as f64).collect()
    }
}
