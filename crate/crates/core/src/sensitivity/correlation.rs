use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::sample::{ranks, Sample};

use super::SensitivityResult;

/// Ordinary least squares fit `Y ≈ α₀ + Σ α_i X_i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearRegression {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub r2: f64,
}

impl LinearRegression {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.intercept + self.coefficients.iter().zip(x).map(|(a, v)| a * v).sum::<f64>()
    }
}

fn check(x: &Sample, y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Dimension {
            expected: x.len(),
            found: y.len(),
        });
    }
    Ok(())
}

pub fn linear_regression(x: &Sample, y: &[f64]) -> Result<LinearRegression> {
    check(x, y)?;
    let (n, d) = (x.len(), x.dim());
    if n <= d + 1 {
        return invalid(format!("regression needs more than {} rows, got {n}", d + 1));
    }
    // Centring the columns keeps the normal equations well scaled.
    let xm = x.mean();
    let ym = y.iter().sum::<f64>() / n as f64;
    let a = DMatrix::from_fn(n, d, |i, j| x.row(i)[j] - xm[j]);
    let b = DVector::from_iterator(n, y.iter().map(|v| v - ym));
    let qr = a.clone().qr();
    let r = qr.r();
    let scale = (0..d).map(|j| a.column(j).norm()).fold(0.0, f64::max);
    for j in 0..d {
        if !(r[(j, j)].abs() > 1e-12 * scale) {
            return Err(Error::Numerical(format!("rank-deficient design matrix (column {j})")));
        }
    }
    let qtb = qr.q().transpose() * &b;
    let coef = r
        .solve_upper_triangular(&qtb)
        .ok_or_else(|| Error::Numerical("rank-deficient design matrix".into()))?;
    let resid = &b - &a * &coef;
    let ss_tot = b.norm_squared();
    let r2 = if ss_tot > 0.0 { 1.0 - resid.norm_squared() / ss_tot } else { 1.0 };
    let coefficients: Vec<f64> = coef.iter().copied().collect();
    let intercept = ym - coefficients.iter().zip(&xm).map(|(a, m)| a * m).sum::<f64>();
    Ok(LinearRegression {
        intercept,
        coefficients,
        r2,
    })
}

fn std_of(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Standard regression coefficients `SRC_i = α_i σ_i / σ_Y`, with the fitted
/// regression attached.
pub fn src(x: &Sample, y: &[f64]) -> Result<SensitivityResult> {
    let reg = linear_regression(x, y)?;
    let sy = std_of(y);
    if !(sy > 0.0) {
        return invalid("output has zero variance");
    }
    let sx = x.std();
    if let Some(j) = sx.iter().position(|s| !(*s > 0.0)) {
        return invalid(format!("input column {j} has zero variance"));
    }
    let values = reg.coefficients.iter().zip(&sx).map(|(a, s)| a * s / sy).collect();
    Ok(SensitivityResult::new("src", labels(x), values, x.len()).with_regression(reg))
}

fn rank_sample(x: &Sample) -> Result<Sample> {
    let cols: Vec<Vec<f64>> = (0..x.dim()).map(|j| ranks(&x.column(j))).collect();
    Sample::from_columns(&cols)?.set_labels(x.labels().to_vec())
}

/// SRC computed on ranks.
pub fn srrc(x: &Sample, y: &[f64]) -> Result<SensitivityResult> {
    let mut r = src(&rank_sample(x)?, &ranks(y))?;
    r.kind = "srrc".into();
    Ok(r)
}

pub fn pearson_coefficient(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Dimension {
            expected: x.len(),
            found: y.len(),
        });
    }
    if x.len() < 2 {
        return invalid("correlation needs at least two points");
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if !(sxx > 0.0 && syy > 0.0) {
        return invalid("correlation of a constant variable");
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Pearson correlation of the average ranks.
pub fn spearman_coefficient(x: &[f64], y: &[f64]) -> Result<f64> {
    pearson_coefficient(&ranks(x), &ranks(y))
}

fn labels(x: &Sample) -> Vec<String> {
    x.labels().to_vec()
}

pub fn pearson(x: &Sample, y: &[f64]) -> Result<SensitivityResult> {
    check(x, y)?;
    let values = (0..x.dim())
        .map(|j| pearson_coefficient(&x.column(j), y))
        .collect::<Result<_>>()?;
    Ok(SensitivityResult::new("pearson", labels(x), values, x.len()))
}

pub fn spearman(x: &Sample, y: &[f64]) -> Result<SensitivityResult> {
    check(x, y)?;
    let ry = ranks(y);
    let values = (0..x.dim())
        .map(|j| pearson_coefficient(&ranks(&x.column(j)), &ry))
        .collect::<Result<_>>()?;
    Ok(SensitivityResult::new("spearman", labels(x), values, x.len()))
}
