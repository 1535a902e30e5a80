//! The three ways of obtaining per-column bounds: provided up front, read
//! directly off the data, or estimated with a noisy histogram over a fixed
//! power-of-two grid.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dp::{self, BudgetLedger, Stage};
use crate::error::{Error, Result};
use crate::table::{direct_range, ColumnDomain, Domain, Provenance, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainStrategy {
    Provided,
    Direct,
    Dp,
}

impl DomainStrategy {
    pub const ALL: [DomainStrategy; 3] = [DomainStrategy::Provided, DomainStrategy::Direct, DomainStrategy::Dp];

    pub fn name(self) -> &'static str {
        match self {
            DomainStrategy::Provided => "provided",
            DomainStrategy::Direct => "direct",
            DomainStrategy::Dp => "dp",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtractionConfig {
    /// Grid spans `[-2^m, 2^m]`.
    pub m: u32,
    /// Per-bound failure probability used to calibrate the first threshold.
    pub beta: f64,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        Self { m: 32, beta: 1e-9 }
    }
}

impl ExtractionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.m > 1000 {
            return Err(Error::invalid(format!("extraction exponent m must be in [1, 1000], got {}", self.m)));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::invalid(format!("beta must be in (0, 1), got {}", self.beta)));
        }
        Ok(())
    }

    /// Edges `-2^m, ..., -2, -1, 0, 1, 2, ..., 2^m`: `2m + 2` bins.
    pub fn grid(&self) -> Vec<f64> {
        let m = self.m as i32;
        let mut edges: Vec<f64> = (0..=m).rev().map(|k| -(2f64.powi(k))).collect();
        edges.push(0.0);
        edges.extend((0..=m).map(|k| 2f64.powi(k)));
        edges
    }
}

/// Domain given up front. Consumes no budget.
pub fn provided_domain(spec: &[(f64, f64)]) -> Result<Domain> {
    if spec.is_empty() {
        return Err(Error::invalid("provided domain has no columns"));
    }
    let bounds = spec
        .iter()
        .map(|&(lo, hi)| ColumnDomain::new(lo, hi))
        .collect::<Result<Vec<_>>>()?;
    Ok(Domain {
        bounds,
        provenance: Provenance::Provided,
    })
}

/// Raw per-column min/max. This reads the data without noise, so the ledger
/// gets a leak marker.
pub fn direct_domain(table: &Table, ledger: &mut BudgetLedger) -> Domain {
    let bounds = (0..table.n_cols())
        .map(|c| {
            let (dom, degenerate) = direct_range(table, c);
            if degenerate {
                log::debug!("column {c} is constant; widened direct domain to {dom:?}");
            }
            dom
        })
        .collect();
    ledger.leak(Stage::Extract, "direct min/max");
    Domain {
        bounds,
        provenance: Provenance::Direct,
    }
}

/// Noisy-histogram bound estimate for one column.
///
/// Counts fall into the fixed power-of-two grid (values clamped to the
/// outermost edges), each count gets `Lap(1/eps)`, and the threshold starts at
/// `ln(1/(2β))/eps` and halves while no noisy count reaches it and it is
/// still above 1. An empty bin clears the starting threshold with
/// probability β, while a bin holding a single record still qualifies as the
/// noise vanishes.
/// The bounds are the outer edges of the lowest and highest qualifying bins.
/// The caller records the budget.
pub fn dp_domain_column<R: Rng + ?Sized>(
    values: &[f64],
    eps: f64,
    cfg: &ExtractionConfig,
    rng: &mut R,
) -> Result<ColumnDomain> {
    if !(eps > 0.0) {
        return Err(Error::invalid(format!("domain extraction eps must be positive, got {eps}")));
    }
    cfg.validate()?;
    let grid = cfg.grid();
    let n_bins = grid.len() - 1;
    let (min, max) = (grid[0], grid[n_bins]);
    let mut counts = vec![0.0f64; n_bins];
    for &v in values {
        let v = v.clamp(min, max);
        let j = (grid.partition_point(|&e| e <= v).max(1) - 1).min(n_bins - 1);
        counts[j] += 1.0;
    }
    let scale = 1.0 / eps;
    for c in counts.iter_mut() {
        *c += dp::sample_laplace(scale, rng);
    }

    let mut threshold = scale * (1.0 / (2.0 * cfg.beta)).ln();
    loop {
        let first = counts.iter().position(|&c| c >= threshold);
        let last = counts.iter().rposition(|&c| c >= threshold);
        if let (Some(lo), Some(hi)) = (first, last) {
            return ColumnDomain::new(grid[lo], grid[hi + 1]);
        }
        if threshold <= 1.0 {
            return Err(Error::DomainExtractionFailed { column: 0 });
        }
        threshold /= 2.0;
    }
}

/// DP bounds for every column, splitting `eps_total` evenly across columns.
/// A column whose extraction fails falls back to the full grid range.
pub fn dp_domain<R: Rng + ?Sized>(
    table: &Table,
    eps_total: f64,
    cfg: &ExtractionConfig,
    ledger: &mut BudgetLedger,
    rng: &mut R,
) -> Result<Domain> {
    if !(eps_total > 0.0) {
        return Err(Error::invalid(format!("dp domain extraction needs eps > 0, got {eps_total}")));
    }
    let eps = eps_total / table.n_cols() as f64;
    let full = 2f64.powi(cfg.m as i32);
    let mut bounds = Vec::with_capacity(table.n_cols());
    for c in 0..table.n_cols() {
        let dom = match dp_domain_column(table.column(c), eps, cfg, rng) {
            Ok(dom) => dom,
            Err(Error::DomainExtractionFailed { .. }) => {
                log::warn!("dp domain extraction failed for column {c}; using the full grid range");
                ColumnDomain { lo: -full, hi: full }
            }
            Err(e) => return Err(e),
        };
        ledger.spend(Stage::Extract, "dp_domain", eps, 0.0)?;
        bounds.push(dom);
    }
    Ok(Domain {
        bounds,
        provenance: Provenance::Dp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dp::{PrivacyBudget, RandomStream};

    fn ledger(eps_extract: f64) -> BudgetLedger {
        BudgetLedger::new(PrivacyBudget {
            eps_extract,
            eps_disc: 0.0,
            eps_model: 0.0,
            delta: 0.0,
        })
    }

    #[test]
    fn grid_shape() {
        let cfg = ExtractionConfig { m: 3, beta: 1e-9 };
        assert_eq!(cfg.grid(), vec![-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0]);
        assert_eq!(ExtractionConfig::default().grid().len() - 1, 66);
    }

    #[test]
    fn provided_checks_bounds() {
        let d = provided_domain(&[(0.0, 1.0)]).unwrap();
        assert_eq!(d.bounds, vec![ColumnDomain { lo: 0.0, hi: 1.0 }]);
        assert_eq!(d.provenance, Provenance::Provided);
        assert!(provided_domain(&[]).is_err());
        assert!(provided_domain(&[(1.0, 1.0)]).is_err());
    }

    #[test]
    fn direct_marks_leak() {
        let t = Table::new(vec!["a".into()], vec![vec![4.0]]).unwrap();
        let mut l = ledger(0.0);
        let d = direct_domain(&t, &mut l);
        assert!(l.has_leak());
        assert_eq!(d.bounds[0].lo, 4.0);
        assert!(d.bounds[0].hi > 4.0);
    }

    #[test]
    fn noiseless_grid_snapping() {
        let mut rng = RandomStream::from_seed(0);
        let cfg = ExtractionConfig::default();
        let values: Vec<f64> = vec![3.0, 10.0, 500.0, 900.0];
        let d = dp_domain_column(&values, 1e9, &cfg, &mut rng).unwrap();
        assert_eq!((d.lo, d.hi), (2.0, 1024.0));
        let zeros = vec![0.0; 20];
        let d = dp_domain_column(&zeros, 1e9, &cfg, &mut rng).unwrap();
        assert_eq!((d.lo, d.hi), (0.0, 1.0));
        let neg = vec![-1.0, -3.0];
        let d = dp_domain_column(&neg, 1e9, &cfg, &mut rng).unwrap();
        assert_eq!((d.lo, d.hi), (-4.0, 0.0));
    }

    #[test]
    fn out_of_grid_values_are_clamped() {
        let mut rng = RandomStream::from_seed(0);
        let cfg = ExtractionConfig { m: 4, beta: 1e-9 };
        let d = dp_domain_column(&[1e6, -1e6], 1e9, &cfg, &mut rng).unwrap();
        assert_eq!((d.lo, d.hi), (-16.0, 16.0));
    }

    #[test]
    fn empty_column_fails_at_low_eps() {
        let mut rng = RandomStream::from_seed(5);
        let cfg = ExtractionConfig { m: 2, beta: 1e-9 };
        // with no data and tiny noise nothing reaches the floor threshold of 1
        assert!(matches!(
            dp_domain_column(&[], 1e9, &cfg, &mut rng),
            Err(Error::DomainExtractionFailed { .. })
        ));
    }

    #[test]
    fn dp_domain_splits_eps_per_column() {
        let t = Table::new(vec!["a".into(), "b".into()], vec![vec![1.0, 2.0], vec![5.0, 6.0]]).unwrap();
        let mut l = ledger(0.5);
        let mut rng = RandomStream::from_seed(9);
        let d = dp_domain(&t, 0.5, &ExtractionConfig::default(), &mut l, &mut rng).unwrap();
        assert_eq!(d.provenance, Provenance::Dp);
        assert_eq!(l.entries().len(), 2);
        assert!(l.entries().iter().all(|e| e.eps == 0.25));
    }

    #[test]
    fn dp_domain_deterministic() {
        let t = Table::new(vec!["a".into()], vec![(0..200).map(f64::from).collect()]).unwrap();
        let run = || {
            let mut rng = RandomStream::from_seed(11);
            dp_domain(&t, 1.0, &ExtractionConfig::default(), &mut ledger(1.0), &mut rng).unwrap()
        };
        assert_eq!(run(), run());
    }
}
