//! Gaussian kernel smoothing with optional reflection at known bounds.

use crate::error::{invalid, Result};
use crate::numeric::{integrate, invert_cdf, norm_cdf, norm_pdf};

#[derive(Debug, Clone)]
pub struct KernelDensity {
    /// Kernel centers: the data followed by their reflections.
    centers: Vec<f64>,
    n: usize,
    bandwidth: f64,
    lower: Option<f64>,
    upper: Option<f64>,
    /// Kernel mass inside the bounds, per datum.
    mass: f64,
}

/// Silverman's rule for the normal kernel: `sd * (4 / (3 n))^(1/5)`.
pub fn silverman_bandwidth(data: &[f64]) -> Result<f64> {
    let n = data.len();
    if n < 2 {
        return invalid("kernel smoothing needs at least two points");
    }
    let mean = data.iter().sum::<f64>() / n as f64;
    let var = data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    if !(var > 0.0) {
        return invalid("kernel smoothing needs a sample with positive variance");
    }
    Ok(var.sqrt() * (4.0 / (3.0 * n as f64)).powf(0.2))
}

/// Kernel density with Silverman bandwidth; data are mirrored at the given bounds.
pub fn kernel_smooth(data: &[f64], lower: Option<f64>, upper: Option<f64>) -> Result<KernelDensity> {
    let h = silverman_bandwidth(data)?;
    KernelDensity::new(data, h, lower, upper)
}

impl KernelDensity {
    pub fn new(data: &[f64], bandwidth: f64, lower: Option<f64>, upper: Option<f64>) -> Result<Self> {
        if data.len() < 2 {
            return invalid("kernel smoothing needs at least two points");
        }
        if !(bandwidth > 0.0) {
            return invalid("bandwidth must be positive");
        }
        if let (Some(l), Some(u)) = (lower, upper) {
            if l >= u {
                return invalid("lower bound must be below upper bound");
            }
        }
        if data
            .iter()
            .any(|&x| lower.is_some_and(|l| x < l) || upper.is_some_and(|u| x > u))
        {
            return invalid("data outside the declared bounds");
        }
        let mut centers = data.to_vec();
        if let Some(l) = lower {
            centers.extend(data.iter().map(|x| 2.0 * l - x));
        }
        if let Some(u) = upper {
            centers.extend(data.iter().map(|x| 2.0 * u - x));
        }
        let lo = lower.unwrap_or(f64::NEG_INFINITY);
        let hi = upper.unwrap_or(f64::INFINITY);
        let mass = centers
            .iter()
            .map(|c| norm_cdf((hi - c) / bandwidth) - norm_cdf((lo - c) / bandwidth))
            .sum::<f64>()
            / data.len() as f64;
        Ok(KernelDensity {
            centers,
            n: data.len(),
            bandwidth,
            lower,
            upper,
            mass,
        })
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn support(&self) -> (f64, f64) {
        (
            self.lower.unwrap_or(f64::NEG_INFINITY),
            self.upper.unwrap_or(f64::INFINITY),
        )
    }

    fn inside(&self, x: f64) -> bool {
        let (lo, hi) = self.support();
        x >= lo && x <= hi
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if !self.inside(x) {
            return 0.0;
        }
        let h = self.bandwidth;
        self.centers.iter().map(|c| norm_pdf((x - c) / h)).sum::<f64>()
            / (self.n as f64 * h * self.mass)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return 1.0;
        }
        let h = self.bandwidth;
        let total = self
            .centers
            .iter()
            .map(|c| norm_cdf((x - c) / h) - norm_cdf((lo - c) / h))
            .sum::<f64>();
        (total / (self.n as f64 * self.mass)).clamp(0.0, 1.0)
    }

    pub fn quantile(&self, p: f64) -> f64 {
        let (lo, hi) = self.support();
        if p <= 0.0 {
            return lo;
        }
        if p >= 1.0 {
            return hi;
        }
        invert_cdf(|x| self.cdf(x), |x| self.pdf(x), p, lo, hi, self.data_mean())
    }

    fn data_mean(&self) -> f64 {
        self.centers[..self.n].iter().sum::<f64>() / self.n as f64
    }

    /// Range outside which the density is negligible.
    fn effective_range(&self) -> (f64, f64) {
        let data = &self.centers[..self.n];
        let min = data.iter().cloned().fold(f64::INFINITY, f64::min) - 12.0 * self.bandwidth;
        let max = data.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 12.0 * self.bandwidth;
        let (lo, hi) = self.support();
        (min.max(lo), max.min(hi))
    }

    pub fn mean(&self) -> f64 {
        if self.lower.is_none() && self.upper.is_none() {
            return self.data_mean();
        }
        let (a, b) = self.effective_range();
        integrate(|x| x * self.pdf(x), a, b, 1e-10 * a.abs().max(b.abs()).max(1.0)).value
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        if self.lower.is_none() && self.upper.is_none() {
            let data = &self.centers[..self.n];
            let v = data.iter().map(|x| (x - m).powi(2)).sum::<f64>() / self.n as f64;
            return v + self.bandwidth * self.bandwidth;
        }
        let (a, b) = self.effective_range();
        let scale = (b - a).max(1.0);
        integrate(|x| (x - m).powi(2) * self.pdf(x), a, b, 1e-10 * scale * scale).value
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn silverman_constant() {
        // Data with unit sample standard deviation.
        let n = 100;
        let raw: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let m = raw.iter().sum::<f64>() / n as f64;
        let sd = (raw.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        let data: Vec<f64> = raw.iter().map(|x| x / sd).collect();
        let h = silverman_bandwidth(&data).unwrap();
        assert!((h - 0.4217).abs() < 1e-4);
        assert!(silverman_bandwidth(&[1.0]).is_err());
        assert!(silverman_bandwidth(&[2.0, 2.0, 2.0]).is_err());
    }

    #[test]
    fn mirrored_density_normalized() {
        let data: Vec<f64> = (1..=50).map(|i| (i as f64 * 0.37).fract() * 3.0).collect();
        for (lo, hi) in [(None, None), (Some(0.0), None), (Some(0.0), Some(3.0))] {
            let k = kernel_smooth(&data, lo, hi).unwrap();
            let (a, b) = k.support();
            let total = integrate(|x| k.pdf(x), a, b, 1e-12).value;
            assert!((total - 1.0).abs() < 1e-6, "{lo:?} {hi:?}: {total}");
            let mid = k.quantile(0.3);
            assert!((k.cdf(mid) - 0.3).abs() < 1e-10);
        }
    }
}
