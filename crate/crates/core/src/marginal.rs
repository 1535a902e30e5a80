//! Contingency counting and mutual information over binned columns.

use crate::error::{Error, Result};

/// Mutual information in bits of a two-way table of non-negative counts.
/// Empty cells contribute nothing.
pub fn mutual_information(joint: &[Vec<f64>]) -> Result<f64> {
    let rows: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
    let n_cols = joint.first().map_or(0, Vec::len);
    if joint.iter().any(|r| r.len() != n_cols) {
        return Err(Error::invalid("contingency table rows differ in length"));
    }
    if joint.iter().flatten().any(|&c| !(c >= 0.0) || !c.is_finite()) {
        return Err(Error::invalid("contingency counts must be finite and non-negative"));
    }
    let cols: Vec<f64> = (0..n_cols).map(|j| joint.iter().map(|r| r[j]).sum()).collect();
    let total: f64 = rows.iter().sum();
    if !(total > 0.0) {
        return Err(Error::invalid("contingency table has zero total"));
    }
    let mut mi = 0.0;
    for (i, row) in joint.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c > 0.0 {
                mi += c / total * (c * total / (rows[i] * cols[j])).log2();
            }
        }
    }
    Ok(mi.max(0.0))
}

/// Sensitivity bound of empirical mutual information (in bits) for `n`
/// records: `(2/n)·log2 n + ((n-1)/n)·log2(n/(n-1))`.
pub fn mi_sensitivity(n: usize) -> f64 {
    let n = n.max(2) as f64;
    (2.0 / n) * n.log2() + ((n - 1.0) / n) * (n / (n - 1.0)).log2()
}

/// Mutual information over integer columns using a precomputed `c·ln c`
/// table, so scoring many candidate pairs needs no logarithms.
pub(crate) struct MiCounter {
    xlogx: Vec<f64>,
    joint: Vec<u32>,
    n: usize,
}

impl MiCounter {
    pub fn new(n: usize) -> Self {
        let xlogx = (0..=n).map(|c| if c == 0 { 0.0 } else { c as f64 * (c as f64).ln() }).collect();
        Self {
            xlogx,
            joint: Vec::new(),
            n,
        }
    }

    /// `I(X; Y)` in bits for columns with `x_size` and `y_size` categories.
    pub fn mi_bits(&mut self, x: &[u32], x_size: usize, y: &[u32], y_size: usize) -> f64 {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        if self.n == 0 {
            return 0.0;
        }
        self.joint.clear();
        self.joint.resize(x_size * y_size, 0);
        for (&a, &b) in x.iter().zip(y) {
            self.joint[a as usize * y_size + b as usize] += 1;
        }
        let mut sum_joint = 0.0;
        let mut row_sums = vec![0u32; x_size];
        let mut col_sums = vec![0u32; y_size];
        for (i, row) in self.joint.chunks_exact(y_size).enumerate() {
            for (j, &c) in row.iter().enumerate() {
                if c > 0 {
                    sum_joint += self.xlogx[c as usize];
                    row_sums[i] += c;
                    col_sums[j] += c;
                }
            }
        }
        let sum_rows: f64 = row_sums.iter().map(|&c| self.xlogx[c as usize]).sum();
        let sum_cols: f64 = col_sums.iter().map(|&c| self.xlogx[c as usize]).sum();
        let n = self.n as f64;
        let nats = (sum_joint - sum_rows - sum_cols + self.xlogx[self.n]) / n;
        (nats / std::f64::consts::LN_2).max(0.0)
    }
}

/// Counts over the mixed-radix index of several columns; the last column
/// varies fastest.
pub(crate) fn joint_index(columns: &[&[u32]], sizes: &[usize], n: usize) -> Vec<u32> {
    let mut idx = vec![0u32; n];
    for (col, &size) in columns.iter().zip(sizes) {
        for (slot, &v) in idx.iter_mut().zip(col.iter()) {
            *slot = *slot * size as u32 + v;
        }
    }
    idx
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn independent_and_diagonal() {
        let mi = mutual_information(&[vec![25.0, 25.0], vec![25.0, 25.0]]).unwrap();
        assert!(mi.abs() < 1e-15);
        let mi = mutual_information(&[vec![50.0, 0.0], vec![0.0, 50.0]]).unwrap();
        assert!((mi - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_total_is_an_error() {
        assert!(mutual_information(&[vec![0.0, 0.0]]).is_err());
        assert!(mutual_information(&[vec![-1.0, 2.0]]).is_err());
    }

    #[test]
    fn sensitivity_value() {
        let n = 4898.0f64;
        let expected = 2.0 / n * n.log2() + (n - 1.0) / n * (n / (n - 1.0)).log2();
        assert_eq!(mi_sensitivity(4898), expected);
        assert!(mi_sensitivity(4898) < 0.01);
    }

    proptest! {
        #[test]
        fn counter_matches_float_version(pairs in proptest::collection::vec((0u32..4, 0u32..3), 1..200)) {
            let x: Vec<u32> = pairs.iter().map(|p| p.0).collect();
            let y: Vec<u32> = pairs.iter().map(|p| p.1).collect();
            let mut joint = vec![vec![0.0; 3]; 4];
            for &(a, b) in &pairs {
                joint[a as usize][b as usize] += 1.0;
            }
            let reference = mutual_information(&joint).unwrap();
            let fast = MiCounter::new(x.len()).mi_bits(&x, 4, &y, 3);
            prop_assert!((reference - fast).abs() < 1e-9);
        }
    }

    #[test]
    fn joint_index_is_mixed_radix() {
        let a = [1u32, 0, 2];
        let b = [0u32, 3, 1];
        assert_eq!(joint_index(&[&a, &b], &[3, 4], 3), vec![4, 3, 9]);
    }
}
