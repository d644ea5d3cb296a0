//! Goodness-of-fit tests and visual-test data.

use serde::Serialize;

use crate::dist::Univariate;
use crate::error::{invalid, Result};
use crate::numeric::{chi2_sf, ln_gamma, norm_cdf, norm_quantile};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    /// Significance level.
    pub threshold: f64,
    /// `p_value > threshold`.
    pub accepted: bool,
}

impl TestResult {
    fn new(statistic: f64, p_value: f64, threshold: f64) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        TestResult {
            statistic,
            p_value,
            threshold,
            accepted: p_value > threshold,
        }
    }
}

/// Kolmogorov statistic `sup |F_n - F|` of a sample against a continuous cdf.
pub fn ks_statistic(data: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// Largest matrix order for the exact computation; beyond it the
/// Stephens-corrected limiting distribution is used.
const MAX_EXACT_ORDER: usize = 801;

/// `P(D_n < d)` for the two-sided Kolmogorov statistic.
///
/// Exact Marsaglia-Tsang-Wang matrix-power evaluation with `k = ceil(n d)`,
/// `m = 2k - 1`, `h = k - n d`. When `n d^2` is large the probability is
/// indistinguishable from one and their closed-form tail approximation is used; when
/// the matrix would exceed `MAX_EXACT_ORDER` the Stephens-corrected Kolmogorov limit
/// `K((sqrt(n) + 0.12 + 0.11/sqrt(n)) d)` is used.
pub fn kolmogorov_cdf(n: usize, d: f64) -> f64 {
    let nf = n as f64;
    if d >= 1.0 {
        return 1.0;
    }
    if d <= 0.5 / nf {
        return 0.0;
    }
    let s = d * d * nf;
    if s > 7.24 || (s > 3.76 && n > 99) {
        return 1.0 - 2.0 * (-(2.000071 + 0.331 / nf.sqrt() + 1.409 / nf) * s).exp();
    }
    let k = (nf * d).floor() as usize + 1;
    let m = 2 * k - 1;
    if m > MAX_EXACT_ORDER {
        return kolmogorov_limit((nf.sqrt() + 0.12 + 0.11 / nf.sqrt()) * d);
    }
    let h = k as f64 - nf * d;
    let mut mat = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            if i + 1 >= j {
                mat[i * m + j] = 1.0;
            }
        }
    }
    for i in 0..m {
        mat[i * m] -= h.powi(i as i32 + 1);
        mat[(m - 1) * m + i] -= h.powi((m - i) as i32);
    }
    if 2.0 * h - 1.0 > 0.0 {
        mat[(m - 1) * m] += (2.0 * h - 1.0).powi(m as i32);
    }
    for i in 0..m {
        for j in 0..m {
            if i + 1 > j {
                let f = (1..=(i + 1 - j)).fold(1.0, |acc, v| acc * v as f64);
                mat[i * m + j] /= f;
            }
        }
    }
    let (power, exponent) = matrix_power(&mat, m, n);
    // s = H^n[k-1][k-1] * n! / n^n, carried in log space with a power-of-ten exponent.
    let entry = power[(k - 1) * m + k - 1];
    let log_s = entry.ln() + exponent as f64 * std::f64::consts::LN_10 + ln_gamma(nf + 1.0)
        - nf * nf.ln();
    log_s.exp().clamp(0.0, 1.0)
}

fn matrix_multiply(a: &[f64], b: &[f64], m: usize) -> Vec<f64> {
    let mut c = vec![0.0; m * m];
    for i in 0..m {
        for k in 0..m {
            let aik = a[i * m + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..m {
                c[i * m + j] += aik * b[k * m + j];
            }
        }
    }
    c
}

/// `A^n` with a decimal exponent kept separately to avoid overflow.
fn matrix_power(a: &[f64], m: usize, n: usize) -> (Vec<f64>, i64) {
    if n == 1 {
        return (a.to_vec(), 0);
    }
    let (half, e) = matrix_power(a, m, n / 2);
    let mut v = matrix_multiply(&half, &half, m);
    let mut exponent = 2 * e;
    if n % 2 == 1 {
        v = matrix_multiply(a, &v, m);
    }
    let centre = v[(m / 2) * m + m / 2];
    if centre > 1e140 {
        v.iter_mut().for_each(|x| *x *= 1e-140);
        exponent += 140;
    }
    (v, exponent)
}

/// Limiting Kolmogorov distribution `K(x) = 1 - 2 sum (-1)^(k-1) exp(-2 k^2 x^2)`.
pub fn kolmogorov_limit(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < 1.0 {
        // Small-argument form converges faster.
        let c = std::f64::consts::PI * std::f64::consts::PI / (8.0 * x * x);
        let s: f64 = (0..50)
            .map(|k| (-(2 * k + 1) as f64 * (2 * k + 1) as f64 * c).exp())
            .sum();
        return (2.0 * std::f64::consts::PI).sqrt() / x * s;
    }
    let s: f64 = (1..100)
        .map(|k| {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            sign * (-2.0 * (k * k) as f64 * x * x).exp()
        })
        .sum();
    (1.0 - 2.0 * s).clamp(0.0, 1.0)
}

/// Kolmogorov-Smirnov test against a fully specified distribution.
pub fn ks_test(data: &[f64], dist: &Univariate, level: f64) -> Result<TestResult> {
    if data.is_empty() {
        return invalid("Kolmogorov test needs at least one point");
    }
    let d = ks_statistic(data, |x| dist.cdf(x));
    Ok(TestResult::new(d, 1.0 - kolmogorov_cdf(data.len(), d), level))
}

/// Default number of equiprobable bins: `ceil(2 n^(2/5))`.
pub fn default_bin_count(n: usize) -> usize {
    (2.0 * (n as f64).powf(0.4)).ceil() as usize
}

/// Chi-square test with equiprobable bins under `dist`; `fitted` parameters reduce the
/// degrees of freedom.
pub fn chi2_test(
    data: &[f64],
    dist: &Univariate,
    bins: Option<usize>,
    fitted: usize,
    level: f64,
) -> Result<TestResult> {
    let n = data.len();
    let bins = bins.unwrap_or_else(|| default_bin_count(n));
    if n == 0 || bins < 2 {
        return invalid("chi-square test needs data and at least two bins");
    }
    if bins <= 1 + fitted {
        return invalid("not enough bins for the fitted parameters");
    }
    let mut counts = vec![0usize; bins];
    for &x in data {
        let b = ((dist.cdf(x) * bins as f64).floor() as usize).min(bins - 1);
        counts[b] += 1;
    }
    let expected = n as f64 / bins as f64;
    let stat: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let dof = (bins - 1 - fitted) as f64;
    Ok(TestResult::new(stat, chi2_sf(stat, dof), level))
}

/// Anderson-Darling normality test with estimated mean and variance.
/// Returns the modified statistic `A*` and its D'Agostino-Stephens p-value.
pub fn ad_test(data: &[f64], level: f64) -> Result<TestResult> {
    let n = data.len();
    if n < 8 {
        return invalid("Anderson-Darling test needs at least 8 points");
    }
    let nf = n as f64;
    let mean = data.iter().sum::<f64>() / nf;
    let sd = (data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0)).sqrt();
    if !(sd > 0.0) {
        return invalid("degenerate sample: zero variance");
    }
    let mut z: Vec<f64> = data.iter().map(|x| (x - mean) / sd).collect();
    z.sort_by(f64::total_cmp);
    let mut s = 0.0;
    for i in 0..n {
        let lo = norm_cdf(z[i]).ln();
        let hi = norm_cdf(-z[n - 1 - i]).ln();
        s += (2 * i + 1) as f64 * (lo + hi);
    }
    let a2 = -nf - s / nf;
    let a = a2 * (1.0 + 0.75 / nf + 2.25 / (nf * nf));
    let p = if a >= 0.6 {
        (1.2937 - 5.709 * a + 0.0186 * a * a).exp()
    } else if a >= 0.34 {
        (0.9177 - 4.279 * a - 1.38 * a * a).exp()
    } else if a >= 0.2 {
        1.0 - (-8.318 + 42.796 * a - 59.938 * a * a).exp()
    } else {
        1.0 - (-13.436 + 101.14 * a - 223.73 * a * a).exp()
    };
    Ok(TestResult::new(a, p, level))
}

/// Plotting position `(i - 0.5) / n` for the i-th order statistic (1-based).
fn positions(n: usize) -> impl Iterator<Item = f64> {
    (1..=n).map(move |i| (i as f64 - 0.5) / n as f64)
}

/// QQ pairs `(model quantile, sample quantile)`.
pub fn qq_plot_data(data: &[f64], dist: &Univariate) -> Vec<(f64, f64)> {
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    positions(sorted.len())
        .zip(sorted)
        .map(|(p, x)| (dist.quantile(p), x))
        .collect()
}

/// QQ pairs between two samples of equal size.
pub fn qq_two_samples(a: &[f64], b: &[f64]) -> Result<Vec<(f64, f64)>> {
    if a.len() != b.len() {
        return invalid("QQ comparison of samples needs equal sizes");
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    Ok(x.into_iter().zip(y).collect())
}

/// Henry line data: `(normal score, sorted value)` pairs and the fitted line
/// `value = mean + sd * score`.
#[derive(Debug, Clone, Serialize)]
pub struct HenryLine {
    pub points: Vec<(f64, f64)>,
    pub mean: f64,
    pub sd: f64,
}

pub fn henry_line_data(data: &[f64]) -> Result<HenryLine> {
    let n = data.len();
    if n < 2 {
        return invalid("Henry line needs at least two points");
    }
    let mean = data.iter().sum::<f64>() / n as f64;
    let sd = (data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let points = positions(n).map(norm_quantile).zip(sorted).collect();
    Ok(HenryLine { points, mean, sd })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kolmogorov_edge_cases() {
        assert_eq!(kolmogorov_cdf(10, 1.0), 1.0);
        assert_eq!(kolmogorov_cdf(10, 0.05), 0.0);
        // n = 1: P(D_1 < d) = 2d - 1 for d in [1/2, 1].
        assert!((kolmogorov_cdf(1, 0.8) - 0.6).abs() < 1e-12);
        // Published value P(D_10 < 0.274) = 0.6284796154565043 (Marsaglia-Tsang-Wang).
        assert!((kolmogorov_cdf(10, 0.274) - 0.628_479_615_456_504_3).abs() < 1e-12);
    }

    #[test]
    fn uniform_counts_give_zero_chi_square() {
        let u = Univariate::uniform(0.0, 1.0).unwrap();
        let data: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        let r = chi2_test(&data, &u, Some(10), 0, 0.05).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn qq_of_identical_samples_is_diagonal() {
        let a = [3.0, 1.0, 2.0];
        assert!(qq_two_samples(&a, &a).unwrap().iter().all(|(x, y)| x == y));
    }
}
