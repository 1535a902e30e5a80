use rand::Rng;

use crate::dp;
use crate::error::{Error, Result};
use crate::table::{BinEdges, ColumnDomain};

const FANOUT: f64 = 2.0;

/// Noise scale `λ = (2β - 1) / ((β - 1)·eps)` for fanout `β`.
pub fn privtree_noise_scale(eps: f64) -> f64 {
    (2.0 * FANOUT - 1.0) / ((FANOUT - 1.0) * eps)
}

/// Binary PrivTree partition of `dom`.
///
/// A node at depth `h` holding `c` of the `n` values has biased fraction
/// `c/n - h·δ` with `δ = λ·ln β / n` and `τ = 1/b`; it splits
/// at its midpoint when that fraction plus `Lap(λ)/n` exceeds `τ` and
/// `h < max_depth`. The whole recursion spends `eps` once.
pub fn privtree_edges<R: Rng + ?Sized>(
    values: &[f64],
    b: usize,
    eps: f64,
    dom: ColumnDomain,
    max_depth: u32,
    rng: &mut R,
) -> Result<BinEdges> {
    if !(eps > 0.0) {
        return Err(Error::invalid(format!("privtree eps must be positive, got {eps}")));
    }
    let mut sorted: Vec<f64> = values.iter().map(|&v| dom.clamp(v)).collect();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len().max(1) as f64;
    let lambda = privtree_noise_scale(eps);
    let params = Params {
        tau: 1.0 / b as f64,
        decay: lambda * FANOUT.ln() / n,
        lambda,
        n,
        max_depth,
    };
    let mut edges = vec![dom.lo];
    split(&sorted, dom.lo, dom.hi, 0, &params, rng, &mut edges);
    BinEdges::new(edges)
}

struct Params {
    tau: f64,
    decay: f64,
    lambda: f64,
    n: f64,
    max_depth: u32,
}

/// Visits the node `[lo, hi]` holding `values`, appending the right edge of
/// every leaf in left-to-right order.
fn split<R: Rng + ?Sized>(
    values: &[f64],
    lo: f64,
    hi: f64,
    depth: u32,
    p: &Params,
    rng: &mut R,
    edges: &mut Vec<f64>,
) {
    let fraction = values.len() as f64 / p.n;
    let biased = fraction - f64::from(depth) * p.decay;
    let noisy = biased + dp::sample_laplace(p.lambda, rng) / p.n;
    let mid = lo + (hi - lo) / 2.0;
    if noisy > p.tau && depth < p.max_depth && lo < mid && mid < hi {
        let cut = values.partition_point(|&v| v < mid);
        split(&values[..cut], lo, mid, depth + 1, p, rng, edges);
        split(&values[cut..], mid, hi, depth + 1, p, rng, edges);
    } else {
        edges.push(hi);
    }
}
