//! Row-major point collections with column labels.

use std::io;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    labels: Vec<String>,
    data: Vec<f64>,
}

fn default_labels(dim: usize) -> Vec<String> {
    (0..dim).map(|i| format!("X{i}")).collect()
}

impl Sample {
    /// Empty sample of dimension `dim` with labels `X0, X1, ...`.
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "sample dimension must be positive");
        Sample {
            labels: default_labels(dim),
            data: Vec::new(),
        }
    }

    pub fn with_labels<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Self {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        assert!(!labels.is_empty(), "sample dimension must be positive");
        Sample {
            labels,
            data: Vec::new(),
        }
    }

    /// Builds from a flat row-major buffer.
    pub fn from_flat(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || data.len() % dim != 0 {
            return invalid(format!(
                "buffer of length {} is not a whole number of rows of dimension {dim}",
                data.len()
            ));
        }
        Ok(Sample {
            labels: default_labels(dim),
            data,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map_or(0, |r| r.as_ref().len());
        if dim == 0 {
            return invalid("cannot infer dimension from rows");
        }
        let mut sample = Sample::new(dim);
        for row in rows {
            sample.push(row.as_ref())?;
        }
        Ok(sample)
    }

    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        if columns.is_empty() {
            return invalid("no columns");
        }
        let n = columns[0].len();
        if columns.iter().any(|c| c.len() != n) {
            return invalid("columns of unequal length");
        }
        let dim = columns.len();
        let mut data = Vec::with_capacity(n * dim);
        for i in 0..n {
            data.extend(columns.iter().map(|c| c[i]));
        }
        Sample::from_flat(dim, data)
    }

    pub fn set_labels<S: Into<String>>(mut self, labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: labels.len(),
            });
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn push(&mut self, row: &[f64]) -> Result<()> {
        if row.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: row.len(),
            });
        }
        self.data.extend_from_slice(row);
        Ok(())
    }

    /// Appends all rows of `other`, which must have the same dimension.
    pub fn extend(&mut self, other: &Sample) -> Result<()> {
        if other.dim() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        self.data.extend_from_slice(&other.data);
        Ok(())
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.data[i * d..(i + 1) * d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim())
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    /// Sub-sample of the given row indices, in that order.
    pub fn select(&self, indices: &[usize]) -> Sample {
        let mut data = Vec::with_capacity(indices.len() * self.dim());
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Sample {
            labels: self.labels.clone(),
            data,
        }
    }

    /// Sub-sample of the given columns.
    pub fn marginal(&self, columns: &[usize]) -> Sample {
        let mut data = Vec::with_capacity(columns.len() * self.len());
        for row in self.rows() {
            data.extend(columns.iter().map(|&j| row[j]));
        }
        Sample {
            labels: columns.iter().map(|&j| self.labels[j].clone()).collect(),
            data,
        }
    }

    pub fn mean(&self) -> Vec<f64> {
        let n = self.len() as f64;
        let mut m = vec![0.0; self.dim()];
        for row in self.rows() {
            for (acc, x) in m.iter_mut().zip(row) {
                *acc += x;
            }
        }
        m.iter_mut().for_each(|v| *v /= n);
        m
    }

    /// Unbiased per-column variance.
    pub fn variance(&self) -> Vec<f64> {
        let cov = self.covariance();
        (0..self.dim()).map(|j| cov[(j, j)]).collect()
    }

    pub fn std(&self) -> Vec<f64> {
        self.variance().into_iter().map(f64::sqrt).collect()
    }

    /// Unbiased covariance matrix.
    pub fn covariance(&self) -> DMatrix<f64> {
        let d = self.dim();
        let n = self.len();
        let mean = self.mean();
        let mut cov = DMatrix::zeros(d, d);
        for row in self.rows() {
            for i in 0..d {
                let di = row[i] - mean[i];
                for j in 0..=i {
                    cov[(i, j)] += di * (row[j] - mean[j]);
                }
            }
        }
        let denom = n.saturating_sub(1).max(1) as f64;
        for i in 0..d {
            for j in 0..=i {
                cov[(i, j)] /= denom;
                cov[(j, i)] = cov[(i, j)];
            }
        }
        cov
    }

    /// Pearson correlation matrix.
    pub fn correlation(&self) -> DMatrix<f64> {
        let cov = self.covariance();
        let d = self.dim();
        DMatrix::from_fn(d, d, |i, j| cov[(i, j)] / (cov[(i, i)] * cov[(j, j)]).sqrt())
    }

    /// Per-column empirical quantile with linear interpolation between order statistics.
    pub fn quantile(&self, p: f64) -> Vec<f64> {
        (0..self.dim())
            .map(|j| {
                let mut c = self.column(j);
                c.sort_by(f64::total_cmp);
                empirical_quantile(&c, p)
            })
            .collect()
    }

    pub fn min(&self) -> Vec<f64> {
        self.fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> Vec<f64> {
        self.fold(f64::NEG_INFINITY, f64::max)
    }

    fn fold(&self, init: f64, f: fn(f64, f64) -> f64) -> Vec<f64> {
        let mut acc = vec![init; self.dim()];
        for row in self.rows() {
            for (a, &x) in acc.iter_mut().zip(row) {
                *a = f(*a, x);
            }
        }
        acc
    }

    /// Column-wise concatenation of two samples with equal length.
    pub fn hstack(&self, other: &Sample) -> Result<Sample> {
        if self.len() != other.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                found: other.len(),
            });
        }
        let mut data = Vec::with_capacity(self.data.len() + other.data.len());
        for (a, b) in self.rows().zip(other.rows()) {
            data.extend_from_slice(a);
            data.extend_from_slice(b);
        }
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        Ok(Sample { labels, data })
    }

    pub fn write_csv<W: io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&self.labels)?;
        for row in self.rows() {
            w.write_record(row.iter().map(|x| x.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn read_csv<R: io::Read>(reader: R) -> Result<Sample> {
        let mut r = csv::Reader::from_reader(reader);
        let labels: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
        let mut sample = Sample::with_labels(labels);
        for record in r.records() {
            let record = record?;
            let row = record
                .iter()
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::InvalidParameter(format!("bad number {t:?}: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            sample.push(&row)?;
        }
        Ok(sample)
    }
}

/// Quantile of sorted data, linear interpolation on positions (n-1)p.
pub fn empirical_quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Average ranks (1-based) with ties sharing their mean rank.
pub fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_and_covariance() {
        let s = Sample::from_rows(&[[1.0, 2.0], [3.0, 6.0], [5.0, 10.0]]).unwrap();
        assert_eq!(s.mean(), vec![3.0, 6.0]);
        assert_eq!(s.variance(), vec![4.0, 16.0]);
        assert!((s.correlation()[(0, 1)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn csv_round_trip() {
        let s = Sample::from_rows(&[[0.1, 1e-300], [-2.5, 1.0 / 3.0]])
            .unwrap()
            .set_labels(["Q", "K"])
            .unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("Q,K\n"));
        let back = Sample::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn ranks_average_ties() {
        assert_eq!(ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn quantile_interpolates() {
        assert_eq!(empirical_quantile(&[0.0, 1.0, 2.0, 3.0, 4.0], 0.5), 2.0);
        assert_eq!(empirical_quantile(&[0.0, 10.0], 0.25), 2.5);
    }
}
