use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::{mean_distances, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetMode {
    /// Some attribute lies strictly outside the other records' range.
    Outside,
    /// Every attribute lies strictly inside the other records' range.
    Inside,
}

impl TargetMode {
    pub fn name(self) -> &'static str {
        match self {
            TargetMode::Outside => "outside",
            TargetMode::Inside => "inside",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetSelection {
    pub index: usize,
    pub mode: TargetMode,
    pub values: Vec<f64>,
    pub mean_distance: f64,
    /// Per column: is the value outside the remaining records' `[min, max]`?
    pub outside: Vec<bool>,
    /// Per column `(min, max)` of the records other than the target.
    pub remaining_range: Vec<(f64, f64)>,
}

/// Per-column extremes needed to get the range of "everything but row i"
/// in constant time.
struct Extremes {
    min1: f64,
    min1_count: usize,
    min2: f64,
    max1: f64,
    max1_count: usize,
    max2: f64,
}

impl Extremes {
    fn of(col: &[f64]) -> Self {
        let min1 = col.iter().copied().fold(f64::INFINITY, f64::min);
        let max1 = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self {
            min1,
            min1_count: col.iter().filter(|&&v| v == min1).count(),
            min2: col.iter().copied().filter(|&v| v > min1).fold(f64::INFINITY, f64::min),
            max1,
            max1_count: col.iter().filter(|&&v| v == max1).count(),
            max2: col.iter().copied().filter(|&v| v < max1).fold(f64::NEG_INFINITY, f64::max),
        }
    }

    fn without(&self, v: f64) -> (f64, f64) {
        let lo = if v == self.min1 && self.min1_count == 1 { self.min2 } else { self.min1 };
        let hi = if v == self.max1 && self.max1_count == 1 { self.max2 } else { self.max1 };
        (lo, hi)
    }
}

fn describe(table: &Table, dist: &[f64], i: usize, extremes: &[Extremes]) -> TargetSelection {
    let values = table.row(i);
    let remaining_range: Vec<(f64, f64)> = values.iter().zip(extremes).map(|(&v, e)| e.without(v)).collect();
    let outside = values
        .iter()
        .zip(&remaining_range)
        .map(|(&v, &(lo, hi))| v < lo || v > hi)
        .collect();
    TargetSelection {
        index: i,
        mode: TargetMode::Outside,
        values,
        mean_distance: dist[i],
        outside,
        remaining_range,
    }
}

fn satisfies(sel: &TargetSelection, mode: TargetMode) -> bool {
    match mode {
        TargetMode::Outside => sel.outside.iter().any(|&o| o),
        TargetMode::Inside => sel
            .values
            .iter()
            .zip(&sel.remaining_range)
            .all(|(&v, &(lo, hi))| v > lo && v < hi),
    }
}

/// Records ranked by mean standardized distance, furthest first. Distances
/// within a relative `1e-12` count as tied and go to the higher index.
pub fn distance_ranking(dist: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..dist.len()).collect();
    order.sort_by(|&a, &b| {
        let (da, db) = (dist[a], dist[b]);
        if (da - db).abs() <= 1e-12 * da.abs().max(db.abs()) {
            b.cmp(&a)
        } else {
            db.total_cmp(&da)
        }
    });
    order
}

/// The furthest record that satisfies `mode`.
pub fn select_target(table: &Table, mode: TargetMode) -> Result<TargetSelection> {
    if table.n_rows() < 3 {
        return Err(Error::invalid("target selection needs at least three records"));
    }
    let dist = mean_distances(table)?;
    let extremes: Vec<Extremes> = table.columns().iter().map(|c| Extremes::of(c)).collect();
    let order = distance_ranking(&dist);
    for &i in &order {
        let mut sel = describe(table, &dist, i, &extremes);
        if satisfies(&sel, mode) {
            sel.mode = mode;
            return Ok(sel);
        }
    }
    let near_misses = order
        .iter()
        .take(3)
        .map(|&i| {
            let sel = describe(table, &dist, i, &extremes);
            format!("row {i} (distance {:.4}, outside flags {:?})", sel.mean_distance, sel.outside)
        })
        .collect::<Vec<_>>()
        .join("; ");
    Err(Error::NoTarget {
        mode: mode.name().to_owned(),
        near_misses,
    })
}
