//! Brute-force reference implementations shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use synthdomain::dp::RandomStream;
use synthdomain::table::{ColumnDomain, Table};

pub const WINE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/winequality-white-surrogate.csv");

pub fn wine() -> Table {
    synthdomain::table::load_csv(WINE, b';', &["quality".to_string()]).expect("wine data")
}

pub fn names(d: usize) -> Vec<String> {
    (0..d).map(|i| format!("c{i}")).collect()
}

/// Mean pairwise Euclidean distance on z-scored columns, by double loop.
pub fn mean_distance_oracle(cols: &[Vec<f64>]) -> Vec<f64> {
    let n = cols[0].len();
    let z: Vec<Vec<f64>> = cols
        .iter()
        .map(|c| {
            let m = c.iter().sum::<f64>() / n as f64;
            let sd = (c.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n as f64).sqrt();
            c.iter().map(|v| if sd > 0.0 { (v - m) / sd } else { 0.0 }).collect()
        })
        .collect();
    let mut out = vec![0.0; n];
    for i in 0..n {
        let mut total = 0.0;
        for j in 0..n {
            if i == j {
                continue;
            }
            let mut s = 0.0;
            for col in &z {
                s += (col[i] - col[j]).powi(2);
            }
            total += s.sqrt();
        }
        out[i] = total / (n - 1) as f64;
    }
    out
}

/// Largest `j` with `edges[j] <= v` after clamping, capped at the last bin.
pub fn linear_scan_bin(edges: &[f64], v: f64) -> usize {
    let v = v.clamp(edges[0], edges[edges.len() - 1]);
    let mut j = 0;
    for (k, &e) in edges.iter().enumerate() {
        if e <= v {
            j = k;
        }
    }
    j.min(edges.len() - 2)
}

/// Exact gap distribution of the private quantile: weights
/// `(x_{i+1} - x_i)·exp(-eps·|i - alpha·n|/2)` over the padded sorted data.
pub fn quantile_gap_probs(sorted: &[f64], alpha: f64, eps: f64, lo: f64, hi: f64) -> Vec<f64> {
    let mut padded = vec![lo];
    padded.extend_from_slice(sorted);
    padded.push(hi);
    let n = sorted.len() as f64;
    let w: Vec<f64> = (0..padded.len() - 1)
        .map(|i| (padded[i + 1] - padded[i]) * (-eps * (i as f64 - alpha * n).abs() / 2.0).exp())
        .collect();
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}

/// Noiseless Lloyd iterations mirroring the private variant: centres start
/// at cell midpoints, empty clusters collapse to `lo`, clusters empty at
/// the end are dropped, edges are midpoints of the sorted survivors.
pub fn lloyd_oracle(values: &[f64], b: usize, lo: f64, hi: f64, iters: usize) -> Vec<f64> {
    let w = hi - lo;
    let mut centers: Vec<f64> = (0..b).map(|j| lo + w * (j as f64 + 0.5) / b as f64).collect();
    let mut counts = vec![0usize; b];
    for _ in 0..iters {
        counts = vec![0; b];
        let mut sums = vec![0.0; b];
        for &v in values {
            let v = v.clamp(lo, hi);
            let mut best = 0;
            for k in 1..b {
                if (v - centers[k]).abs() < (v - centers[best]).abs() {
                    best = k;
                }
            }
            counts[best] += 1;
            sums[best] += v;
        }
        for k in 0..b {
            centers[k] = if counts[k] > 0 { sums[k] / counts[k] as f64 } else { lo };
        }
    }
    let mut alive: Vec<f64> = (0..b).filter(|&k| counts[k] > 0).map(|k| centers[k]).collect();
    alive.sort_by(f64::total_cmp);
    let mut edges = vec![lo];
    for p in alive.windows(2) {
        let m = (p[0] + p[1]) / 2.0;
        if m > lo && m < hi && m > *edges.last().unwrap() {
            edges.push(m);
        }
    }
    edges.push(hi);
    edges
}

/// Noiseless binary PrivTree: split while `count/n - depth·δ > 1/b`.
pub fn privtree_oracle(values: &[f64], b: usize, eps: f64, lo: f64, hi: f64, max_depth: u32) -> Vec<f64> {
    let n = values.len().max(1) as f64;
    let lambda = 3.0 / eps;
    let delta = lambda * 2f64.ln() / n;
    let tau = 1.0 / b as f64;
    let mut edges = vec![lo];
    fn go(vals: &[f64], lo: f64, hi: f64, depth: u32, p: (f64, f64, f64, u32), edges: &mut Vec<f64>) {
        let (n, delta, tau, max_depth) = p;
        let mid = lo + (hi - lo) / 2.0;
        if vals.len() as f64 / n - depth as f64 * delta > tau && depth < max_depth {
            let left: Vec<f64> = vals.iter().copied().filter(|&v| v < mid).collect();
            let right: Vec<f64> = vals.iter().copied().filter(|&v| v >= mid).collect();
            go(&left, lo, mid, depth + 1, p, edges);
            go(&right, mid, hi, depth + 1, p, edges);
        } else {
            edges.push(hi);
        }
    }
    let clamped: Vec<f64> = values.iter().map(|v| v.clamp(lo, hi)).collect();
    go(&clamped, lo, hi, 0, (n, delta, tau, max_depth), &mut edges);
    edges
}

/// Random 1-D dataset: uniform, a Gaussian mixture, or heavy-tailed; the
/// domain is the data range padded on both sides.
pub fn random_column(rng: &mut RandomStream, n: usize) -> (Vec<f64>, ColumnDomain) {
    let kind = rng.gen_range(0..3);
    let values: Vec<f64> = (0..n)
        .map(|_| match kind {
            0 => rng.gen_range(-50.0..50.0),
            1 => {
                let centre = [-20.0, 5.0, 30.0][rng.gen_range(0..3)];
                centre + 3.0 * normal(rng)
            }
            _ => (2.0 * normal(rng)).exp(),
        })
        .collect();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pad = (hi - lo) * 0.05 + 1e-6;
    (values, ColumnDomain::new(lo - pad, hi + pad).unwrap())
}

pub fn normal(rng: &mut RandomStream) -> f64 {
    let u: f64 = rng.gen_range(f64::EPSILON..1.0);
    let v: f64 = rng.gen();
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0
}

/// Empirical distribution of integer draws over `k` categories.
pub fn frequencies(draws: &[usize], k: usize) -> Vec<f64> {
    let mut f = vec![0.0; k];
    for &d in draws {
        f[d] += 1.0;
    }
    f.iter_mut().for_each(|x| *x /= draws.len() as f64);
    f
}

/// Two-sample Kolmogorov–Smirnov statistic and its asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    let ne = (a.len() * b.len()) as f64 / (a.len() + b.len()) as f64;
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    let mut p = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        p += 2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * lambda * lambda).exp();
    }
    (d, p.clamp(0.0, 1.0))
}

/// Upper-tail p-value of a chi-square statistic via the Wilson–Hilferty
/// normal approximation.
pub fn chi_square_p(stat: f64, dof: usize) -> f64 {
    let k = dof as f64;
    let z = ((stat / k).powf(1.0 / 3.0) - (1.0 - 2.0 / (9.0 * k))) / (2.0 / (9.0 * k)).sqrt();
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

fn erfc(x: f64) -> f64 {
    // Abramowitz–Stegun 7.1.26
    let t = 1.0 / (1.0 + 0.3275911 * x.abs());
    let poly = t * (0.254829592 + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    let e = poly * (-x * x).exp();
    if x >= 0.0 {
        e
    } else {
        2.0 - e
    }
}

/// One-way marginal of integer codes as probabilities.
pub fn marginal(codes: &[u32], k: usize) -> Vec<f64> {
    let v: Vec<usize> = codes.iter().map(|&c| c as usize).collect();
    frequencies(&v, k)
}
