use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::joint::JointDistribution;
use crate::model::Model;
use crate::rng::RngStream;
use crate::sample::empirical_quantile;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SobolIndices {
    pub labels: Vec<String>,
    pub first_order: Vec<f64>,
    pub total_order: Vec<f64>,
    /// Bootstrap 95% percentile intervals.
    pub first_order_ci: Vec<(f64, f64)>,
    pub total_order_ci: Vec<(f64, f64)>,
    pub n: usize,
    pub evaluations: u64,
    pub warnings: Vec<String>,
}

const BOOTSTRAP: usize = 100;

/// Pick-freeze estimates from two independent samples `A`, `B` and the hybrids
/// `C_i` (`A` with column `i` taken from `B`), `N (d + 2)` evaluations in total.
///
/// With `y_A`, `y_B`, `y_i = G(C_i)`:
///
/// - first order, on the pair `(y_B, y_i)` sharing `X_i`:
///   `S_i = (⟨y_B y_i⟩ - m²) / (⟨(y_B² + y_i²)/2⟩ - m²)`, `m = ⟨(y_B + y_i)/2⟩`;
/// - total order, on the pair `(y_A, y_i)` differing only in `X_i`:
///   `S_Ti = ⟨(y_A - y_i)²⟩ / (2V)`, `V` the pooled variance of `y_A` and `y_B`.
pub fn sobol_pickfreeze(
    model: &Model,
    joint: &JointDistribution,
    output: usize,
    n: usize,
    rng: &mut RngStream,
) -> Result<SobolIndices> {
    if !joint.copula().is_independent() {
        return Err(Error::Unsupported("pick-freeze indices need independent inputs".into()));
    }
    if n < 2 {
        return invalid("pick-freeze needs at least two rows");
    }
    if output >= model.output_dim() {
        return invalid(format!("output {output} out of range"));
    }
    let d = joint.dim();
    let a = joint.sample(n, rng);
    let b = joint.sample(n, rng);
    let mut all = a.clone();
    all.extend(&b)?;
    for i in 0..d {
        for k in 0..n {
            let mut row = a.row(k).to_vec();
            row[i] = b.row(k)[i];
            all.push(&row)?;
        }
    }
    let before = model.evaluations();
    let y = model.evaluate(&all)?.column(output);
    let evaluations = model.evaluations() - before;
    let ya = &y[..n];
    let yb = &y[n..2 * n];
    let hybrids: Vec<&[f64]> = (0..d).map(|i| &y[(2 + i) * n..(3 + i) * n]).collect();

    let all_rows: Vec<usize> = (0..n).collect();
    let (first_order, total_order) = estimate(ya, yb, &hybrids, &all_rows)?;

    let mut boot_rng = rng.substream(0x5eed);
    let mut first_boot = vec![Vec::with_capacity(BOOTSTRAP); d];
    let mut total_boot = vec![Vec::with_capacity(BOOTSTRAP); d];
    for _ in 0..BOOTSTRAP {
        let rows: Vec<usize> = (0..n).map(|_| boot_rng.below(n)).collect();
        if let Ok((f, t)) = estimate(ya, yb, &hybrids, &rows) {
            for i in 0..d {
                first_boot[i].push(f[i]);
                total_boot[i].push(t[i]);
            }
        }
    }
    let interval = |mut v: Vec<f64>| {
        if v.is_empty() {
            return (f64::NAN, f64::NAN);
        }
        v.sort_by(f64::total_cmp);
        (empirical_quantile(&v, 0.025), empirical_quantile(&v, 0.975))
    };
    let first_order_ci = first_boot.into_iter().map(interval).collect();
    let total_order_ci = total_boot.into_iter().map(interval).collect();

    let labels = joint.labels().to_vec();
    let warnings = first_order
        .iter()
        .zip(&labels)
        .filter(|(s, _)| !(-0.05..=1.05).contains(*s))
        .map(|(s, l)| format!("first-order index of {l} is {s:.4}, outside [-0.05, 1.05]"))
        .collect();
    Ok(SobolIndices {
        labels,
        first_order,
        total_order,
        first_order_ci,
        total_order_ci,
        n,
        evaluations,
        warnings,
    })
}

fn estimate(ya: &[f64], yb: &[f64], hybrids: &[&[f64]], rows: &[usize]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = rows.len() as f64;
    let (mut sab, mut sab2) = (0.0, 0.0);
    for &k in rows {
        sab += 0.5 * (ya[k] + yb[k]);
        sab2 += 0.5 * (ya[k] * ya[k] + yb[k] * yb[k]);
    }
    let mean = sab / n;
    let var = sab2 / n - mean * mean;
    if !(var > 0.0) {
        return Err(Error::Numerical("output variance is zero".into()));
    }
    let mut first = Vec::with_capacity(hybrids.len());
    let mut total = Vec::with_capacity(hybrids.len());
    for yc in hybrids {
        let (mut s, mut sq, mut prod, mut diff) = (0.0, 0.0, 0.0, 0.0);
        for &k in rows {
            s += 0.5 * (yb[k] + yc[k]);
            sq += 0.5 * (yb[k] * yb[k] + yc[k] * yc[k]);
            prod += yb[k] * yc[k];
            diff += (ya[k] - yc[k]).powi(2);
        }
        let m = s / n;
        let denom = sq / n - m * m;
        first.push(if denom > 0.0 { (prod / n - m * m) / denom } else { 0.0 });
        total.push(diff / n / (2.0 * var));
    }
    Ok((first, total))
}
