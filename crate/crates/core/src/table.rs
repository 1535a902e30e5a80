//! Columnar tables, domains and bin edges shared by every pipeline stage.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Continuous table stored column-major. All columns have the same length
/// and contain only finite values.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::invalid(format!(
                "{} column names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        let n = columns.first().map_or(0, Vec::len);
        if n == 0 {
            return Err(Error::EmptyTable);
        }
        for (name, col) in names.iter().zip(&columns) {
            if col.len() != n {
                return Err(Error::invalid(format!(
                    "column '{name}' has {} rows, expected {n}",
                    col.len()
                )));
            }
            if let Some(v) = col.iter().find(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("column '{name}' holds non-finite value {v}")));
            }
        }
        Ok(Self { names, columns })
    }

    pub fn n_rows(&self) -> usize {
        self.columns[0].len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, c: usize) -> &[f64] {
        &self.columns[c]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn row(&self, r: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[r]).collect()
    }

    /// Copy of the table with record `r` removed.
    pub fn without_row(&self, r: usize) -> Result<Self> {
        let columns = self
            .columns
            .iter()
            .map(|c| {
                c.iter()
                    .enumerate()
                    .filter(|&(i, _)| i != r)
                    .map(|(_, &v)| v)
                    .collect()
            })
            .collect();
        Table::new(self.names.clone(), columns)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// Reads a delimited file with a header row, dropping the named columns.
pub fn load_csv(path: impl AsRef<Path>, delimiter: u8, drop_columns: &[String]) -> Result<Table> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, delimiter, drop_columns)
}

pub fn read_csv<R: std::io::Read>(reader: R, delimiter: u8, drop_columns: &[String]) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    for d in drop_columns {
        if !header.contains(d) {
            return Err(Error::invalid(format!("cannot drop unknown column '{d}'")));
        }
    }
    let keep: Vec<usize> = (0..header.len())
        .filter(|&i| !drop_columns.contains(&header[i]))
        .collect();
    let names: Vec<String> = keep.iter().map(|&i| header[i].clone()).collect();
    let mut columns = vec![Vec::new(); keep.len()];

    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        for (slot, &i) in keep.iter().enumerate() {
            let cell = record.get(i).unwrap_or("");
            let value = cell
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    row: line,
                    column: header[i].clone(),
                    value: cell.to_owned(),
                })?;
            columns[slot].push(value);
        }
    }
    if columns.is_empty() || columns[0].is_empty() {
        return Err(Error::EmptyTable);
    }
    Table::new(names, columns)
}

/// Writes the table as comma-separated text. Values use the shortest
/// representation that parses back to the same `f64`.
pub fn write_csv(table: &Table, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    write_csv_to(table, &mut out).map_err(|e| Error::io(path, e))
}

pub fn write_csv_to<W: Write>(table: &Table, out: &mut W) -> std::io::Result<()> {
    let mut wtr = csv::WriterBuilder::new().from_writer(out);
    wtr.write_record(table.names())?;
    for r in 0..table.n_rows() {
        wtr.write_record(table.columns.iter().map(|c| c[r].to_string()))?;
    }
    wtr.flush()
}

/// Closed interval `[lo, hi]` with `lo < hi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnDomain {
    pub lo: f64,
    pub hi: f64,
}

impl ColumnDomain {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::invalid(format!("domain bounds must satisfy lo < hi, got ({lo}, {hi})")));
        }
        Ok(Self { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.lo, self.hi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Provided,
    Direct,
    Dp,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub bounds: Vec<ColumnDomain>,
    pub provenance: Provenance,
}

impl Domain {
    pub fn len(&self) -> usize {
        self.bounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bounds.is_empty()
    }

    pub fn check_matches(&self, table: &Table) -> Result<()> {
        if self.len() != table.n_cols() {
            return Err(Error::invalid(format!(
                "domain has {} columns, table has {}",
                self.len(),
                table.n_cols()
            )));
        }
        Ok(())
    }
}

/// Strictly increasing cut points; `b'` bins need `b' + 1` edges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BinEdges(Vec<f64>);

impl BinEdges {
    pub fn new(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 {
            return Err(Error::invalid("bin edges need at least two values"));
        }
        if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(format!("bin edges are not strictly increasing: {edges:?}")));
        }
        Ok(Self(edges))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn n_bins(&self) -> usize {
        self.0.len() - 1
    }

    pub fn lo(&self) -> f64 {
        self.0[0]
    }

    pub fn hi(&self) -> f64 {
        self.0[self.0.len() - 1]
    }

    /// Largest `j` with `edges[j] <= clamp(v)`, capped at the last bin.
    pub fn bin_of(&self, v: f64) -> usize {
        let v = v.clamp(self.lo(), self.hi());
        let j = self.0.partition_point(|&e| e <= v);
        (j.max(1) - 1).min(self.n_bins() - 1)
    }

    pub fn bin_bounds(&self, j: usize) -> (f64, f64) {
        (self.0[j], self.0[j + 1])
    }
}

/// Integer bin indices per column, each in `[0, bins[c])`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteTable {
    names: Vec<String>,
    columns: Vec<Vec<u32>>,
    bins: Vec<usize>,
}

impl DiscreteTable {
    pub fn new(names: Vec<String>, columns: Vec<Vec<u32>>, bins: Vec<usize>) -> Result<Self> {
        if names.len() != columns.len() || bins.len() != columns.len() {
            return Err(Error::invalid("discrete table shape mismatch"));
        }
        let n = columns.first().map_or(0, Vec::len);
        for ((col, &b), name) in columns.iter().zip(&bins).zip(&names) {
            if col.len() != n {
                return Err(Error::invalid(format!("column '{name}' length mismatch")));
            }
            if b == 0 || col.iter().any(|&v| v as usize >= b) {
                return Err(Error::invalid(format!("column '{name}' has an index outside [0, {b})")));
            }
        }
        Ok(Self { names, columns, bins })
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, c: usize) -> &[u32] {
        &self.columns[c]
    }

    pub fn bins(&self) -> &[usize] {
        &self.bins
    }
}

/// Non-private min/max of a column. Constant columns are widened by
/// `1e-9·|lo| + 1e-9`; the flag reports whether that happened.
pub fn direct_range(table: &Table, col: usize) -> (ColumnDomain, bool) {
    let (lo, hi) = table
        .column(col)
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if lo < hi {
        (ColumnDomain { lo, hi }, false)
    } else {
        (
            ColumnDomain {
                lo,
                hi: lo + 1e-9 * lo.abs() + 1e-9,
            },
            true,
        )
    }
}

/// Per-column standardization with population standard deviation.
/// Zero-variance columns map to 0. Returns row-major values.
fn standardized_rows(table: &Table) -> Vec<Vec<f64>> {
    let n = table.n_rows() as f64;
    let stats: Vec<(f64, f64)> = table
        .columns()
        .iter()
        .map(|c| {
            let mean = c.iter().sum::<f64>() / n;
            let var = c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            (mean, var.sqrt())
        })
        .collect();
    (0..table.n_rows())
        .map(|r| {
            table
                .columns()
                .iter()
                .zip(&stats)
                .map(|(c, &(mean, sd))| if sd > 0.0 { (c[r] - mean) / sd } else { 0.0 })
                .collect()
        })
        .collect()
}

/// Mean Euclidean distance from each record to every other record, on
/// standardized columns.
pub fn mean_distances(table: &Table) -> Result<Vec<f64>> {
    let n = table.n_rows();
    if n < 2 {
        return Err(Error::invalid("mean distances need at least two records"));
    }
    let rows = standardized_rows(table);
    Ok((0..n)
        .into_par_iter()
        .map(|i| {
            let a = &rows[i];
            let total: f64 = rows
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, b)| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
                .sum();
            total / (n - 1) as f64
        })
        .collect())
}
