use std::io;

use crate::error::{invalid, Error, Result};
use crate::sample::Sample;

/// Every ordered pair of distinct columns of the joined input/output sample.
#[derive(Debug, Clone)]
pub struct ScatterMatrix {
    pub data: Sample,
    pub pairs: Vec<(usize, usize)>,
}

fn join(x: &Sample, y: &Sample) -> Result<Sample> {
    if x.len() != y.len() {
        return Err(Error::Dimension {
            expected: x.len(),
            found: y.len(),
        });
    }
    x.hstack(y)
}

pub fn scatter_matrix_data(x: &Sample, y: &Sample) -> Result<ScatterMatrix> {
    let data = join(x, y)?;
    let d = data.dim();
    let pairs = (0..d).flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j))).collect();
    Ok(ScatterMatrix { data, pairs })
}

impl ScatterMatrix {
    /// Long format: `x_label,y_label,x,y`, one line per point and panel.
    pub fn write_csv<W: io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["x_label", "y_label", "x", "y"])?;
        let labels = self.data.labels();
        for &(i, j) in &self.pairs {
            for row in self.data.rows() {
                w.write_record([
                    labels[i].as_str(),
                    labels[j].as_str(),
                    &row[i].to_string(),
                    &row[j].to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Rows rescaled column-wise to `[0, 1]` with a flag for the rows whose first output
/// lies in a rank band.
#[derive(Debug, Clone)]
pub struct Cobweb {
    pub normalized: Sample,
    pub selected: Vec<bool>,
}

/// Columns are mapped by `(v - min) / (max - min)`; a constant column maps to 0.5.
/// The band `[a, b]` selects the rows ranked `round(a n)..round(b n)` by the first
/// output column, ties broken by row order.
pub fn cobweb_data(x: &Sample, y: &Sample, band: (f64, f64)) -> Result<Cobweb> {
    let (a, b) = band;
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a > b {
        return invalid(format!("quantile band [{a}, {b}] must satisfy 0 <= a <= b <= 1"));
    }
    let data = join(x, y)?;
    let n = data.len();
    let d = data.dim();
    let (lo, hi) = (data.min(), data.max());
    let mut flat = Vec::with_capacity(n * d);
    for row in data.rows() {
        for j in 0..d {
            let range = hi[j] - lo[j];
            flat.push(if range > 0.0 { (row[j] - lo[j]) / range } else { 0.5 });
        }
    }
    let normalized = Sample::from_flat(d, flat)?.set_labels(data.labels().to_vec())?;
    let out = y.column(0);
    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort keeps row order among ties.
    order.sort_by(|&i, &j| out[i].total_cmp(&out[j]));
    let first = (a * n as f64).round() as usize;
    let last = (b * n as f64).round() as usize;
    let mut selected = vec![false; n];
    for &k in &order[first..last] {
        selected[k] = true;
    }
    Ok(Cobweb { normalized, selected })
}

impl Cobweb {
    /// Normalized columns followed by a `selected` 0/1 column.
    pub fn write_csv<W: io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = self.normalized.labels().to_vec();
        header.push("selected".into());
        w.write_record(&header)?;
        for (row, s) in self.normalized.rows().zip(&self.selected) {
            let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            rec.push(u8::from(*s).to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}
