//! PrivBayes: a degree-`k` Bayesian network chosen greedily with the
//! exponential mechanism, Laplace-noised conditional tables, and ancestral
//! sampling.

use itertools::Itertools;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dp::{self, BudgetLedger, Stage};
use crate::error::{Error, Result};
use crate::marginal::{joint_index, mi_sensitivity, MiCounter};
use crate::table::DiscreteTable;

pub use crate::marginal::mutual_information;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BayesNet {
    /// Attributes in the order they were added; parents always come earlier.
    pub ordering: Vec<usize>,
    /// Parent set of each attribute, indexed by attribute.
    pub parents: Vec<Vec<usize>>,
}

/// Conditional distribution of one attribute given its parents. Rows follow
/// the mixed-radix index of the parent values (last parent fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct Cpt {
    pub parents: Vec<usize>,
    pub child_bins: usize,
    pub probs: Vec<f64>,
}

impl Cpt {
    pub fn row(&self, parent_config: usize) -> &[f64] {
        &self.probs[parent_config * self.child_bins..(parent_config + 1) * self.child_bins]
    }

    pub fn n_rows(&self) -> usize {
        self.probs.len() / self.child_bins
    }
}

/// One conditional table per attribute, indexed by attribute.
#[derive(Clone, Debug, PartialEq)]
pub struct CptSet(pub Vec<Cpt>);

/// Greedy network construction. The root is uniform at random; each later
/// step scores every (new attribute, parent subset of size `min(k, chosen)`)
/// pair by mutual information and picks one with the exponential mechanism
/// using `eps_struct / (d - 1)`. `eps_struct == 0` takes the argmax instead.
pub fn learn_network<R: Rng + ?Sized>(dt: &DiscreteTable, k: usize, eps_struct: f64, rng: &mut R) -> Result<BayesNet> {
    let d = dt.n_cols();
    if d == 0 {
        return Err(Error::invalid("cannot learn a network without attributes"));
    }
    if k == 0 || !(eps_struct >= 0.0) {
        return Err(Error::invalid(format!("need k >= 1 and eps >= 0, got k={k}, eps={eps_struct}")));
    }
    let n = dt.n_rows();
    let bins = dt.bins();
    let sensitivity = mi_sensitivity(n);
    let eps_step = if d > 1 { eps_struct / (d - 1) as f64 } else { 0.0 };
    let mut counter = MiCounter::new(n);

    let root = rng.gen_range(0..d);
    let mut ordering = vec![root];
    let mut parents = vec![Vec::new(); d];
    let mut placed = vec![false; d];
    placed[root] = true;

    while ordering.len() < d {
        let size = k.min(ordering.len());
        let mut candidates: Vec<(usize, Vec<usize>)> = Vec::new();
        let mut scores = Vec::new();
        let mut chosen = ordering.clone();
        chosen.sort_unstable();
        for subset in chosen.iter().copied().combinations(size) {
            let cols: Vec<&[u32]> = subset.iter().map(|&p| dt.column(p)).collect();
            let sizes: Vec<usize> = subset.iter().map(|&p| bins[p]).collect();
            let parent_idx = joint_index(&cols, &sizes, n);
            let parent_size: usize = sizes.iter().product();
            for child in (0..d).filter(|&a| !placed[a]) {
                scores.push(counter.mi_bits(&parent_idx, parent_size, dt.column(child), bins[child]));
                candidates.push((child, subset.clone()));
            }
        }
        let pick = if eps_struct == 0.0 {
            argmax(&scores)
        } else {
            dp::exponential_mechanism(&scores, sensitivity, eps_step, rng)?
        };
        let (child, subset) = candidates.swap_remove(pick);
        placed[child] = true;
        ordering.push(child);
        parents[child] = subset;
    }
    Ok(BayesNet { ordering, parents })
}

fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Noisy conditional tables: each attribute's joint count with its parents
/// gets `Lap(d / eps_measure)` per cell, negatives are clipped, and rows are
/// normalized. Rows holding less than one record of noisy mass are treated
/// as unobserved and become uniform.
pub fn measure_conditionals<R: Rng + ?Sized>(
    dt: &DiscreteTable,
    net: &BayesNet,
    eps_measure: f64,
    rng: &mut R,
) -> Result<CptSet> {
    if !(eps_measure > 0.0) {
        return Err(Error::invalid(format!("measurement eps must be positive, got {eps_measure}")));
    }
    let d = dt.n_cols();
    let n = dt.n_rows();
    let bins = dt.bins();
    let scale = d as f64 / eps_measure;
    let mut cpts: Vec<Option<Cpt>> = vec![None; d];
    for &attr in &net.ordering {
        let parents = &net.parents[attr];
        let mut cols: Vec<&[u32]> = parents.iter().map(|&p| dt.column(p)).collect();
        let mut sizes: Vec<usize> = parents.iter().map(|&p| bins[p]).collect();
        cols.push(dt.column(attr));
        sizes.push(bins[attr]);
        let idx = joint_index(&cols, &sizes, n);
        let cells: usize = sizes.iter().product();
        let mut counts = vec![0.0f64; cells];
        for &i in &idx {
            counts[i as usize] += 1.0;
        }
        for c in counts.iter_mut() {
            *c = (*c + dp::sample_laplace(scale, rng)).max(0.0);
        }
        let child_bins = bins[attr];
        for row in counts.chunks_exact_mut(child_bins) {
            let total: f64 = row.iter().sum();
            if total >= 1.0 {
                row.iter_mut().for_each(|c| *c /= total);
            } else {
                row.fill(1.0 / child_bins as f64);
            }
        }
        cpts[attr] = Some(Cpt {
            parents: parents.clone(),
            child_bins,
            probs: counts,
        });
    }
    Ok(CptSet(
        cpts.into_iter()
            .map(|c| c.ok_or_else(|| Error::invalid("network ordering does not cover every attribute")))
            .collect::<Result<_>>()?,
    ))
}

/// Ancestral sampling of `n_out` rows in network order.
pub fn sample<R: Rng + ?Sized>(
    net: &BayesNet,
    cpts: &CptSet,
    names: &[String],
    n_out: usize,
    rng: &mut R,
) -> Result<DiscreteTable> {
    let d = cpts.0.len();
    let bins: Vec<usize> = cpts.0.iter().map(|c| c.child_bins).collect();
    let cumulative: Vec<Vec<f64>> = cpts
        .0
        .iter()
        .map(|c| {
            c.probs
                .chunks_exact(c.child_bins)
                .flat_map(|row| {
                    row.iter().scan(0.0, |acc, &p| {
                        *acc += p;
                        Some(*acc)
                    })
                })
                .collect()
        })
        .collect();
    let mut columns = vec![vec![0u32; n_out]; d];
    for r in 0..n_out {
        for &attr in &net.ordering {
            let cpt = &cpts.0[attr];
            let config = cpt
                .parents
                .iter()
                .fold(0usize, |acc, &p| acc * bins[p] + columns[p][r] as usize);
            let cdf = &cumulative[attr][config * cpt.child_bins..(config + 1) * cpt.child_bins];
            columns[attr][r] = draw_from_cdf(cdf, rng) as u32;
        }
    }
    DiscreteTable::new(names.to_vec(), columns, bins)
}

pub(crate) fn draw_from_cdf<R: Rng + ?Sized>(cdf: &[f64], rng: &mut R) -> usize {
    let u = rng.gen::<f64>() * cdf[cdf.len() - 1];
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivBayesConfig {
    /// Maximum number of parents per attribute.
    pub degree: usize,
    /// Fraction of the model budget spent on structure learning.
    pub structure_share: f64,
}

impl Default for PrivBayesConfig {
    fn default() -> Self {
        Self {
            degree: 2,
            structure_share: 0.5,
        }
    }
}

pub struct FittedPrivBayes {
    pub net: BayesNet,
    pub cpts: CptSet,
}

/// Structure learning plus measurement, with one ledger entry per
/// exponential-mechanism step and per measured marginal.
pub fn fit<R: Rng + ?Sized>(
    dt: &DiscreteTable,
    cfg: &PrivBayesConfig,
    eps_model: f64,
    ledger: &mut BudgetLedger,
    rng: &mut R,
) -> Result<FittedPrivBayes> {
    if !(eps_model > 0.0) || !(cfg.structure_share > 0.0 && cfg.structure_share < 1.0) {
        return Err(Error::invalid(format!(
            "privbayes needs eps > 0 and a structure share in (0, 1), got eps={eps_model}, share={}",
            cfg.structure_share
        )));
    }
    let d = dt.n_cols();
    let eps_struct = if d > 1 { eps_model * cfg.structure_share } else { 0.0 };
    let eps_measure = eps_model - eps_struct;
    for _ in 1..d {
        ledger.spend(Stage::Model, "privbayes_structure_exponential", eps_struct / (d - 1) as f64, 0.0)?;
    }
    for _ in 0..d {
        ledger.spend(Stage::Model, "privbayes_marginal_laplace", eps_measure / d as f64, 0.0)?;
    }
    let net = learn_network(dt, cfg.degree, eps_struct, rng)?;
    let cpts = measure_conditionals(dt, &net, eps_measure, rng)?;
    Ok(FittedPrivBayes { net, cpts })
}
