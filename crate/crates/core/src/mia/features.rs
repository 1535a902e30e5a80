use crate::table::Table;

/// Number of statistics per column.
pub const STATS_PER_COLUMN: usize = 5;

/// Min, max, mean, median and population standard deviation of every
/// column, column after column. The median of an even-length column is the
/// lower middle element.
pub fn naive_features(synth: &Table) -> Vec<f64> {
    let mut out = Vec::with_capacity(STATS_PER_COLUMN * synth.n_cols());
    let mut sorted = Vec::with_capacity(synth.n_rows());
    for col in synth.columns() {
        sorted.clear();
        sorted.extend_from_slice(col);
        sorted.sort_unstable_by(f64::total_cmp);
        let n = sorted.len() as f64;
        let mean = sorted.iter().sum::<f64>() / n;
        let var = sorted.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        out.extend([
            sorted[0],
            sorted[sorted.len() - 1],
            mean,
            sorted[(sorted.len() - 1) / 2],
            var.sqrt(),
        ]);
    }
    out
}
