//! Class-sorted labeled samples: CSV ingestion, standardization and the
//! mean operator.
//!
//! A [`Dataset`] keeps its rows sorted so that every positive example comes
//! before every negative one. All downstream machinery (block-class shuffles,
//! per-class mixing, candidate enumeration) relies on this ordering. The
//! original row order of the source file is retained in an index map so the
//! sample can be exported back in the order it arrived.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// How to treat empty feature cells during ingestion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MissingPolicy {
    /// Replace empty cells by 0.
    Zero,
    /// Reject files containing empty cells.
    Error,
}

/// A labeled sample with binary labels in {-1, +1}, positives first.
#[derive(Debug, Clone)]
pub struct Dataset {
    /// Row-major m x d observation matrix.
    observations: Vec<f64>,
    labels: Vec<i8>,
    feature_names: Vec<String>,
    label_name: String,
    positive_label: String,
    negative_label: String,
    m_pos: usize,
    m_neg: usize,
    d: usize,
    /// `original_index[i]` = position of sorted row `i` in the source file.
    original_index: Vec<usize>,
}

impl Dataset {
    /// Builds a dataset from raw rows and +-1 labels, sorting positives first.
    pub fn from_rows(rows: Vec<Vec<f64>>, labels: Vec<i8>, feature_names: Vec<String>) -> Result<Dataset> {
        if rows.len() != labels.len() {
            return Err(Error::dimension(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let m = rows.len();
        if m < 2 {
            return Err(Error::data("a dataset needs at least 2 examples"));
        }
        let d = rows[0].len();
        if d < 2 {
            return Err(Error::data("a dataset needs at least 2 features"));
        }
        if feature_names.len() != d {
            return Err(Error::dimension(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                d
            )));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != d {
                return Err(Error::dimension(format!("row {} has {} cells, expected {}", i, r.len(), d)));
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::data(format!("non-finite value in row {}", i)));
            }
        }
        for (i, &y) in labels.iter().enumerate() {
            if y != 1 && y != -1 {
                return Err(Error::data(format!("label of row {} is not +-1", i)));
            }
        }

        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by_key(|&i| if labels[i] == 1 { 0 } else { 1 });
        let m_pos = labels.iter().filter(|&&y| y == 1).count();
        let m_neg = m - m_pos;
        if m_pos == 0 || m_neg == 0 {
            return Err(Error::data("empty class: both labels must appear"));
        }

        let mut observations = Vec::with_capacity(m * d);
        let mut sorted_labels = Vec::with_capacity(m);
        let mut original_index = Vec::with_capacity(m);
        for &src in &order {
            observations.extend_from_slice(&rows[src]);
            sorted_labels.push(labels[src]);
            original_index.push(src);
        }

        Ok(Dataset {
            observations,
            labels: sorted_labels,
            feature_names,
            label_name: "label".to_string(),
            positive_label: "1".to_string(),
            negative_label: "-1".to_string(),
            m_pos,
            m_neg,
            d,
            original_index,
        })
    }

    pub fn m(&self) -> usize {
        self.labels.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m_pos(&self) -> usize {
        self.m_pos
    }

    pub fn m_neg(&self) -> usize {
        self.m_neg
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> i8 {
        self.labels[i]
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn label_name(&self) -> &str {
        &self.label_name
    }

    pub fn original_index(&self) -> &[usize] {
        &self.original_index
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.observations[i * self.d..(i + 1) * self.d]
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.observations[i * self.d + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.m()).map(|i| self.value(i, j)).collect()
    }

    /// Indices of one class: positives are `0..m_pos`, negatives the rest.
    pub fn class_range(&self, positive: bool) -> std::ops::Range<usize> {
        if positive {
            0..self.m_pos
        } else {
            self.m_pos..self.m()
        }
    }

    /// Same labels and metadata, new observation matrix.
    pub fn with_observations(&self, observations: Vec<f64>) -> Result<Dataset> {
        if observations.len() != self.observations.len() {
            return Err(Error::dimension("observation matrix size changed".to_string()));
        }
        if observations.iter().any(|v| !v.is_finite()) {
            return Err(Error::data("non-finite value in transformed observations"));
        }
        let mut out = self.clone();
        out.observations = observations;
        Ok(out)
    }

    pub fn observations(&self) -> &[f64] {
        &self.observations
    }

    /// Rows restricted to `keep` (sorted ascending), class order preserved.
    pub fn subset(&self, keep: &[usize]) -> Result<Dataset> {
        let rows: Vec<Vec<f64>> = keep.iter().map(|&i| self.row(i).to_vec()).collect();
        let labels: Vec<i8> = keep.iter().map(|&i| self.labels[i]).collect();
        let mut ds = Dataset::from_rows(rows, labels, self.feature_names.clone())?;
        ds.label_name = self.label_name.clone();
        ds.positive_label = self.positive_label.clone();
        ds.negative_label = self.negative_label.clone();
        Ok(ds)
    }

    /// Writes the sample as CSV in the original row order of the source file.
    pub fn export_csv(&self, path: &Path) -> Result<()> {
        let mut inverse = vec![0usize; self.m()];
        for (sorted_pos, &src) in self.original_index.iter().enumerate() {
            inverse[src] = sorted_pos;
        }
        let mut out = String::new();
        let mut header: Vec<&str> = self.feature_names.iter().map(|s| s.as_str()).collect();
        header.push(&self.label_name);
        let _ = writeln!(out, "{}", header.join(","));
        for src in 0..self.m() {
            let i = inverse[src];
            for j in 0..self.d {
                let _ = write!(out, "{},", format_cell(self.value(i, j)));
            }
            let lab = if self.labels[i] == 1 {
                &self.positive_label
            } else {
                &self.negative_label
            };
            let _ = writeln!(out, "{}", lab);
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

fn format_cell(v: f64) -> String {
    // Shortest representation that round-trips.
    let mut s = format!("{}", v);
    if s.parse::<f64>() != Ok(v) {
        s = format!("{:e}", v);
    }
    s
}

/// Parses a CSV file into a class-sorted [`Dataset`].
///
/// The dialect is fixed: comma separated, UTF-8, one header row. The label
/// column must hold exactly two distinct values, one of which is
/// `positive_label`.
pub fn ingest_csv(
    path: &Path,
    label_column: &str,
    positive_label: &str,
    missing: MissingPolicy,
) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    ingest_csv_str(&text, label_column, positive_label, missing)
}

/// Same as [`ingest_csv`] but from an in-memory string.
pub fn ingest_csv_str(
    text: &str,
    label_column: &str,
    positive_label: &str,
    missing: MissingPolicy,
) -> Result<Dataset> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::data("empty file"))?;
    let names: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    let label_idx = names
        .iter()
        .position(|n| n == label_column)
        .ok_or_else(|| Error::data(format!("missing column '{}'", label_column)))?;
    let feature_names: Vec<String> = names
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != label_idx)
        .map(|(_, n)| n.clone())
        .collect();

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut raw_labels: Vec<String> = Vec::new();
    for (lineno, line) in lines {
        let cells: Vec<&str> = line.split(',').map(|s| s.trim()).collect();
        if cells.len() != names.len() {
            return Err(Error::data(format!(
                "line {}: {} cells, expected {}",
                lineno + 1,
                cells.len(),
                names.len()
            )));
        }
        let mut row = Vec::with_capacity(names.len() - 1);
        for (j, cell) in cells.iter().enumerate() {
            if j == label_idx {
                raw_labels.push(cell.to_string());
                continue;
            }
            if cell.is_empty() {
                match missing {
                    MissingPolicy::Zero => row.push(0.0),
                    MissingPolicy::Error => {
                        return Err(Error::data(format!(
                            "line {}: missing value in column '{}'",
                            lineno + 1,
                            names[j]
                        )))
                    }
                }
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| {
                Error::data(format!(
                    "line {}: non-numeric cell '{}' in column '{}'",
                    lineno + 1,
                    cell,
                    names[j]
                ))
            })?;
            row.push(v);
        }
        rows.push(row);
    }

    let mut distinct: Vec<&String> = Vec::new();
    for l in &raw_labels {
        if !distinct.contains(&l) {
            distinct.push(l);
        }
    }
    if distinct.len() > 2 {
        return Err(Error::data(format!(
            "label column '{}' has {} distinct values, expected 2",
            label_column,
            distinct.len()
        )));
    }
    if !distinct.iter().any(|l| l.as_str() == positive_label) {
        return Err(Error::data(format!(
            "empty class: positive label '{}' never occurs",
            positive_label
        )));
    }
    let negative_label = distinct
        .iter()
        .find(|l| l.as_str() != positive_label)
        .map(|l| l.to_string())
        .ok_or_else(|| Error::data("empty class: only one label value present"))?;

    let labels: Vec<i8> = raw_labels
        .iter()
        .map(|l| if l == positive_label { 1 } else { -1 })
        .collect();

    let mut ds = Dataset::from_rows(rows, labels, feature_names)?;
    ds.label_name = label_column.to_string();
    ds.positive_label = positive_label.to_string();
    ds.negative_label = negative_label;
    Ok(ds)
}

/// Per-feature affine scaling fitted on a training set.
#[derive(Debug, Clone)]
pub struct ScalingParams {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Features whose training standard deviation fell below the floor.
    pub constant: Vec<bool>,
}

const STD_FLOOR: f64 = 1e-12;

/// Centers every feature to mean 0 / std 1 on `train` (population std).
/// Constant features map to 0 and are flagged.
pub fn standardize(train: &Dataset) -> Result<(Dataset, ScalingParams)> {
    let m = train.m() as f64;
    let d = train.d();
    let mut mean = vec![0.0; d];
    let mut std = vec![0.0; d];
    let mut constant = vec![false; d];
    for j in 0..d {
        let mut s = 0.0;
        for i in 0..train.m() {
            s += train.value(i, j);
        }
        mean[j] = s / m;
        let mut v = 0.0;
        for i in 0..train.m() {
            let c = train.value(i, j) - mean[j];
            v += c * c;
        }
        let sd = (v / m).sqrt();
        if sd <= STD_FLOOR {
            constant[j] = true;
            std[j] = 1.0;
        } else {
            std[j] = sd;
        }
    }
    let params = ScalingParams { mean, std, constant };
    let scaled = apply_scaling_inner(train, &params, true)?;
    Ok((scaled, params))
}

/// Applies a previously fitted scaling, e.g. train parameters to a test set.
pub fn apply_scaling(ds: &Dataset, params: &ScalingParams) -> Result<Dataset> {
    apply_scaling_inner(ds, params, false)
}

fn apply_scaling_inner(ds: &Dataset, params: &ScalingParams, zero_constants: bool) -> Result<Dataset> {
    if params.mean.len() != ds.d() {
        return Err(Error::dimension(format!(
            "scaling fitted on {} features, dataset has {}",
            params.mean.len(),
            ds.d()
        )));
    }
    let mut obs = Vec::with_capacity(ds.m() * ds.d());
    for i in 0..ds.m() {
        for j in 0..ds.d() {
            if zero_constants && params.constant[j] {
                obs.push(0.0);
            } else {
                obs.push((ds.value(i, j) - params.mean[j]) / params.std[j]);
            }
        }
    }
    ds.with_observations(obs)
}

/// Mean operator of a sample: `(1/m) sum_i y_i x_i`.
pub fn mean_operator(ds: &Dataset) -> Vec<f64> {
    mean_operator_rows(ds.observations(), ds.labels(), ds.d())
}

/// Mean operator over raw storage, usable for any row/label slices.
pub fn mean_operator_rows(observations: &[f64], labels: &[i8], d: usize) -> Vec<f64> {
    let m = labels.len();
    let mut mu = vec![0.0; d];
    for i in 0..m {
        let y = labels[i] as f64;
        for j in 0..d {
            mu[j] += y * observations[i * d + j];
        }
    }
    for v in &mut mu {
        *v /= m as f64;
    }
    mu
}
