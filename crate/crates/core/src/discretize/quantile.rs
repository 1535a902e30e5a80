use rand::Rng;

use crate::dp;
use crate::error::{Error, Result};
use crate::table::{BinEdges, ColumnDomain};

use super::assemble_edges;

/// Private `alpha`-quantile of `sorted` (ascending, already clamped to `dom`).
///
/// The sorted values are padded with `dom.lo` and `dom.hi`; gap `i` spans
/// `(x_i, x_{i+1})` and is picked with weight
/// `(x_{i+1} - x_i)·exp(-eps·|i - alpha·n| / 2)`. The result is uniform
/// within the chosen gap.
pub fn dp_quantile<R: Rng + ?Sized>(
    sorted: &[f64],
    alpha: f64,
    eps: f64,
    dom: ColumnDomain,
    rng: &mut R,
) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::invalid(format!("quantile eps must be positive, got {eps}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("quantile alpha must be in (0, 1), got {alpha}")));
    }
    let log_weights = gap_log_weights(sorted, alpha, eps, dom);
    let i = dp::sample_log_weights(&log_weights, rng)
        .ok_or_else(|| Error::invalid("all quantile gaps have zero width"))?;
    let (a, b) = gap(sorted, dom, i);
    Ok(a + (b - a) * rng.gen::<f64>())
}

fn gap(sorted: &[f64], dom: ColumnDomain, i: usize) -> (f64, f64) {
    let x = |k: usize| match k {
        0 => dom.lo,
        k if k > sorted.len() => dom.hi,
        k => sorted[k - 1],
    };
    (x(i), x(i + 1))
}

pub(crate) fn gap_log_weights(sorted: &[f64], alpha: f64, eps: f64, dom: ColumnDomain) -> Vec<f64> {
    let n = sorted.len();
    let target = alpha * n as f64;
    (0..=n)
        .map(|i| {
            let (a, b) = gap(sorted, dom, i);
            let width = b - a;
            if width > 0.0 {
                width.ln() - eps * (i as f64 - target).abs() / 2.0
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect()
}

/// `b - 1` private quantiles at `j/b`, each with `eps / b`.
pub fn quantile_edges<R: Rng + ?Sized>(
    values: &[f64],
    b: usize,
    eps: f64,
    dom: ColumnDomain,
    rng: &mut R,
) -> Result<BinEdges> {
    let mut sorted: Vec<f64> = values.iter().map(|&v| dom.clamp(v)).collect();
    sorted.sort_by(f64::total_cmp);
    let per_quantile = eps / b as f64;
    let interior = (1..b)
        .map(|j| dp_quantile(&sorted, j as f64 / b as f64, per_quantile, dom, rng))
        .collect::<Result<Vec<_>>>()?;
    assemble_edges(dom, interior)
}
