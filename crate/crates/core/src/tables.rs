//! Probability vectors, count vectors and two-way contingency tables.

use std::collections::HashSet;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{domain, Error, Result};

/// Tolerance on `sum(p) == 1`.
pub const PROB_SUM_TOL: f64 = 1e-12;

/// A vector of category probabilities: nonnegative, summing to one, `k >= 2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbVector {
    values: Vec<f64>,
    #[serde(skip)]
    strictly_positive: bool,
}

impl ProbVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return domain(format!(
                "a probability vector needs at least 2 categories, got {}",
                values.len()
            ));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return domain(format!("probability {i} is {v}; entries must be finite and >= 0"));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return domain(format!("probabilities sum to {sum}, expected 1"));
        }
        let strictly_positive = values.iter().all(|&v| v > 0.0);
        Ok(Self {
            values,
            strictly_positive,
        })
    }

    /// Normalizes nonnegative weights to sum to one.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return domain("weights must have a positive finite sum");
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    pub fn uniform(k: usize) -> Result<Self> {
        Self::new(vec![1.0 / k as f64; k])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// True when every entry is > 0, which the statistic and the inverse
    /// covariance require.
    pub fn is_strictly_positive(&self) -> bool {
        self.strictly_positive
    }

    pub(crate) fn require_strictly_positive(&self, what: &str) -> Result<()> {
        if self.strictly_positive {
            Ok(())
        } else {
            domain(format!("{what} requires strictly positive probabilities"))
        }
    }

    /// The first `k - 1` probabilities.
    pub fn truncate(&self) -> Vec<f64> {
        self.values[..self.values.len() - 1].to_vec()
    }

    /// Entrywise square roots; a unit vector in the Euclidean norm.
    pub fn sqrt_embed(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.sqrt()).collect()
    }

    /// Reorders the categories: entry `i` of the result is entry `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.len())?;
        Self::new(perm.iter().map(|&i| self.values[i]).collect())
    }
}

/// Observed counts `N_1..N_k` with their total `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountVector {
    counts: Vec<u64>,
    n: u64,
}

impl CountVector {
    pub fn new(counts: Vec<u64>) -> Self {
        let n = counts.iter().sum();
        Self { counts, n }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Empirical frequencies `N_j / n`. All zero when `n == 0`.
    pub fn proportions(&self) -> Vec<f64> {
        if self.n == 0 {
            return vec![0.0; self.counts.len()];
        }
        let n = self.n as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.len())?;
        Ok(Self::new(perm.iter().map(|&i| self.counts[i]).collect()))
    }
}

fn check_permutation(perm: &[usize], len: usize) -> Result<()> {
    let mut seen = vec![false; len];
    if perm.len() != len {
        return domain("permutation length mismatch");
    }
    for &i in perm {
        if i >= len || std::mem::replace(&mut seen[i], true) {
            return domain("not a permutation");
        }
    }
    Ok(())
}

/// Row totals, column totals and the grand total of a table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Margins {
    pub row_totals: Vec<u64>,
    pub col_totals: Vec<u64>,
    pub grand_total: u64,
}

/// An `r x c` table of counts with labelled rows and columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContingencyTable {
    rows: usize,
    cols: usize,
    /// Row-major.
    counts: Vec<u64>,
    row_labels: Vec<String>,
    col_labels: Vec<String>,
}

impl ContingencyTable {
    pub fn new(counts: Vec<Vec<u64>>, row_labels: Vec<String>, col_labels: Vec<String>) -> Result<Self> {
        let rows = counts.len();
        let cols = counts.first().map_or(0, Vec::len);
        if rows < 2 || cols < 2 {
            return domain(format!("a table needs at least 2 rows and 2 columns, got {rows}x{cols}"));
        }
        if let Some(i) = counts.iter().position(|r| r.len() != cols) {
            return domain(format!("row {i} has {} cells, expected {cols}", counts[i].len()));
        }
        if row_labels.len() != rows || col_labels.len() != cols {
            return domain("label count does not match table shape");
        }
        if let Some(l) = first_duplicate(&row_labels) {
            return domain(format!("duplicate row label {l:?}"));
        }
        if let Some(l) = first_duplicate(&col_labels) {
            return domain(format!("duplicate column label {l:?}"));
        }
        let counts: Vec<u64> = counts.into_iter().flatten().collect();
        if counts.iter().sum::<u64>() == 0 {
            return domain("table grand total must be at least 1");
        }
        Ok(Self {
            rows,
            cols,
            counts,
            row_labels,
            col_labels,
        })
    }

    /// Builds a table with generated labels `R1..Rr` and `C1..Cc`.
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self> {
        let r = counts.len();
        let c = counts.first().map_or(0, Vec::len);
        Self::new(
            counts,
            (1..=r).map(|i| format!("R{i}")).collect(),
            (1..=c).map(|j| format!("C{j}")).collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, row: usize, col: usize) -> u64 {
        self.counts[row * self.cols + col]
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn margins(&self) -> Margins {
        let mut row_totals = vec![0u64; self.rows];
        let mut col_totals = vec![0u64; self.cols];
        for i in 0..self.rows {
            for j in 0..self.cols {
                let v = self.get(i, j);
                row_totals[i] += v;
                col_totals[j] += v;
            }
        }
        let grand_total = row_totals.iter().sum();
        Margins {
            row_totals,
            col_totals,
            grand_total,
        }
    }

    pub fn grand_total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Row-major flattening into `r * c` categories.
    pub fn flatten(&self) -> CountVector {
        CountVector::new(self.counts.clone())
    }

    pub fn transpose(&self) -> Self {
        let mut counts = Vec::with_capacity(self.counts.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                counts.push(self.get(i, j));
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            counts,
            row_labels: self.col_labels.clone(),
            col_labels: self.row_labels.clone(),
        }
    }

    /// Parses the CSV layout accepted by [`parse_table`].
    pub fn parse(text: &str) -> Result<Self> {
        parse_table(text)
    }

    /// Serializes to the CSV layout accepted by [`parse_table`].
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for l in &self.col_labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for i in 0..self.rows {
            out.push_str(&self.row_labels[i]);
            for j in 0..self.cols {
                let _ = write!(out, ",{}", self.get(i, j));
            }
            out.push('\n');
        }
        out
    }
}

fn first_duplicate(labels: &[String]) -> Option<&str> {
    let mut seen = HashSet::new();
    labels.iter().find(|l| !seen.insert(l.as_str())).map(String::as_str)
}

fn parse_err(row: usize, column: Option<usize>, message: impl Into<String>) -> Error {
    Error::Parse {
        row,
        column,
        message: message.into(),
    }
}

/// Parses a two-way table from CSV.
///
/// The first record is a header: an empty cell (or `rows`) followed by the
/// column labels. Every following record is a row label followed by one
/// nonnegative integer per column. Label order is preserved.
pub fn parse_table(text: &str) -> Result<ContingencyTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut records = Vec::new();
    for (idx, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| {
            let row = e.position().map_or(idx + 1, |p| p.line() as usize);
            parse_err(row, None, format!("malformed CSV: {e}"))
        })?;
        let line = rec.position().map_or(idx + 1, |p| p.line() as usize);
        records.push((line, rec));
    }

    let Some((header_line, header)) = records.first() else {
        return Err(parse_err(1, None, "empty document"));
    };
    let corner = header.get(0).unwrap_or("");
    if !(corner.is_empty() || corner == "rows") {
        return Err(parse_err(
            *header_line,
            Some(1),
            format!("header must start with an empty cell or \"rows\", found {corner:?}"),
        ));
    }
    let col_labels: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
    let c = col_labels.len();
    if c < 2 {
        return Err(parse_err(*header_line, None, format!("need at least 2 columns, found {c}")));
    }
    if let Some(j) = (0..c).find(|&j| col_labels[..j].contains(&col_labels[j])) {
        return Err(parse_err(
            *header_line,
            Some(j + 2),
            format!("duplicate column label {:?}", col_labels[j]),
        ));
    }

    let mut row_labels: Vec<String> = Vec::new();
    let mut counts = Vec::new();
    for (line, rec) in &records[1..] {
        if rec.len() != c + 1 {
            return Err(parse_err(
                *line,
                None,
                format!("ragged row: expected {} fields, found {}", c + 1, rec.len()),
            ));
        }
        let label = rec[0].to_owned();
        if row_labels.contains(&label) {
            return Err(parse_err(*line, Some(1), format!("duplicate row label {label:?}")));
        }
        let mut row = Vec::with_capacity(c);
        for (j, cell) in rec.iter().enumerate().skip(1) {
            let v: i128 = cell.parse().map_err(|_| {
                parse_err(*line, Some(j + 1), format!("not an integer: {cell:?}"))
            })?;
            if v < 0 {
                return Err(parse_err(*line, Some(j + 1), format!("negative count {v}")));
            }
            let v = u64::try_from(v)
                .map_err(|_| parse_err(*line, Some(j + 1), format!("count {v} out of range")))?;
            row.push(v);
        }
        row_labels.push(label);
        counts.push(row);
    }
    let last_line = records.last().map_or(1, |(l, _)| *l);
    if counts.len() < 2 {
        return Err(parse_err(last_line, None, format!("need at least 2 rows, found {}", counts.len())));
    }
    if counts.iter().flatten().sum::<u64>() == 0 {
        return Err(parse_err(last_line, None, "table grand total is zero"));
    }
    ContingencyTable::new(counts, row_labels, col_labels)
}
