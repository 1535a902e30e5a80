use rand::Rng;

use crate::dp;
use crate::error::Result;
use crate::table::{BinEdges, ColumnDomain};

use super::{assemble_edges, uniform_edges};

#[derive(Clone, Debug)]
pub struct KMeansEdges {
    pub edges: BinEdges,
    /// Centres that survived the final emptiness check, ascending.
    pub centers: Vec<f64>,
    /// All clusters came out empty and uniform edges were used instead.
    pub fell_back: bool,
}

/// One-dimensional DP Lloyd iterations turned into bin edges.
///
/// Centres start at the midpoints of `b` equal-width cells. Each of `iters`
/// rounds spends `eps / iters`, half on two-sided geometric noise for the
/// cluster sizes and half on Laplace noise for the cluster sums (taken
/// relative to `dom.lo`, so the sum sensitivity is the domain width).
/// Clusters whose last noisy size is below one are dropped and the edges are
/// the midpoints between the surviving centres.
pub fn kmeans_edges<R: Rng + ?Sized>(
    values: &[f64],
    b: usize,
    eps: f64,
    dom: ColumnDomain,
    iters: usize,
    rng: &mut R,
) -> Result<KMeansEdges> {
    let iters = iters.max(1);
    let eps_half = eps / iters as f64 / 2.0;
    let width = dom.width();
    let sum_scale = width / eps_half;
    let clamped: Vec<f64> = values.iter().map(|&v| dom.clamp(v)).collect();

    let mut centers: Vec<f64> = (0..b).map(|j| dom.lo + width * (j as f64 + 0.5) / b as f64).collect();
    let mut noisy_counts = vec![0i64; b];
    for _ in 0..iters {
        let mut counts = vec![0i64; b];
        let mut sums = vec![0.0f64; b];
        for &v in &clamped {
            let k = nearest(&centers, v);
            counts[k] += 1;
            sums[k] += v - dom.lo;
        }
        for k in 0..b {
            noisy_counts[k] = counts[k] + dp::two_sided_geometric(eps_half, 1, rng)?;
            let noisy_sum = sums[k] + dp::sample_laplace(sum_scale, rng);
            centers[k] = dom.clamp(dom.lo + noisy_sum / noisy_counts[k].max(1) as f64);
        }
    }

    let mut survivors: Vec<f64> = centers
        .iter()
        .zip(&noisy_counts)
        .filter(|&(_, &c)| c >= 1)
        .map(|(&c, _)| c)
        .collect();
    if survivors.is_empty() {
        log::warn!("all k-means clusters empty; falling back to uniform edges");
        return Ok(KMeansEdges {
            edges: uniform_edges(dom, b)?,
            centers: survivors,
            fell_back: true,
        });
    }
    survivors.sort_by(f64::total_cmp);
    let cuts = survivors.windows(2).map(|w| (w[0] + w[1]) / 2.0).collect();
    Ok(KMeansEdges {
        edges: assemble_edges(dom, cuts)?,
        centers: survivors,
        fell_back: false,
    })
}

/// Index of the closest centre; ties go to the lower index.
fn nearest(centers: &[f64], v: f64) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (k, &c) in centers.iter().enumerate() {
        let d = (v - c).abs();
        if d < best_d {
            best = k;
            best_d = d;
        }
    }
    best
}
