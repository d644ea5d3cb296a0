//! Uncertainty propagation: extremes, central tendency and failure probabilities.

mod central;
mod form;
mod minmax;
mod simulation;
mod subset;

pub use central::{mc_central_tendency, sturges_bins, taylor_moments, CentralTendency, Histogram, TaylorMoments};
pub use form::{form, FormResult, FormSettings};
pub use minmax::{minmax_doe, minmax_optimize, Direction, Extremes, Optimum};
pub use simulation::{
    directional_sampling_pf, importance_sampling_pf, mc_pf, DirectionalSettings, SamplingSettings,
};
pub use subset::{subset_sampling_pf, SubsetSettings, SubsetStep};

use serde::Serialize;

/// Normal quantile for two-sided 95% intervals.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistoryPoint {
    pub n: u64,
    pub estimate: f64,
    pub half_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReliabilityResult {
    pub method: String,
    pub pf: f64,
    pub variance: f64,
    pub ci95: (f64, f64),
    /// Model evaluations spent by the estimator.
    pub evaluations: u64,
    /// Number of samples, directions or subset samples behind the estimate.
    pub size: u64,
    pub history: Vec<HistoryPoint>,
    pub warnings: Vec<String>,
}

impl ReliabilityResult {
    fn clt(method: &str, pf: f64, variance: f64, evaluations: u64, size: u64, history: Vec<HistoryPoint>) -> Self {
        let h = Z95 * variance.max(0.0).sqrt();
        ReliabilityResult {
            method: method.to_owned(),
            pf,
            variance,
            ci95: (pf - h, pf + h),
            evaluations,
            size,
            history,
            warnings: Vec::new(),
        }
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci95.1 - self.ci95.0)
    }

    pub fn coefficient_of_variation(&self) -> f64 {
        if self.pf > 0.0 {
            self.variance.sqrt() / self.pf
        } else {
            f64::INFINITY
        }
    }

    /// Writes the convergence history as `n,estimate,ci_low,ci_high`.
    pub fn write_history<W: std::io::Write>(&self, writer: W) -> crate::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["n", "estimate", "ci_low", "ci_high"])?;
        for h in &self.history {
            w.write_record([
                h.n.to_string(),
                h.estimate.to_string(),
                (h.estimate - h.half_width).to_string(),
                (h.estimate + h.half_width).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Running sums of a weighted indicator estimator.
#[derive(Debug, Default, Clone, Copy)]
struct Accumulator {
    n: u64,
    sum: f64,
    sum_sq: f64,
}

impl Accumulator {
    fn push(&mut self, v: f64) {
        self.n += 1;
        self.sum += v;
        self.sum_sq += v * v;
    }

    fn mean(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.sum / self.n as f64
        }
    }

    /// Variance of the mean estimator.
    fn variance_of_mean(&self) -> f64 {
        if self.n < 2 {
            return f64::INFINITY;
        }
        let n = self.n as f64;
        let m = self.mean();
        ((self.sum_sq / n - m * m) * n / (n - 1.0)).max(0.0) / n
    }

    fn history_point(&self) -> HistoryPoint {
        HistoryPoint {
            n: self.n,
            estimate: self.mean(),
            half_width: Z95 * self.variance_of_mean().sqrt(),
        }
    }
}
