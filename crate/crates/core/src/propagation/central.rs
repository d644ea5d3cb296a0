use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::joint::JointDistribution;
use crate::model::Model;
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TaylorMoments {
    pub mean_first_order: f64,
    pub mean_second_order: f64,
    pub variance: f64,
    pub std: f64,
}

/// Quadratic-form moments around the input mean:
/// `μ ≈ G(E X)`, `σ² ≈ ∇Gᵀ C ∇G`, second-order mean `G(E X) + ½ tr(H C)`,
/// with `C` the input covariance.
pub fn taylor_moments(model: &Model, joint: &JointDistribution, output: usize) -> Result<TaylorMoments> {
    if model.input_dim() != joint.dim() {
        return Err(Error::Dimension {
            expected: joint.dim(),
            found: model.input_dim(),
        });
    }
    if output >= model.output_dim() {
        return invalid(format!("output {output} out of range"));
    }
    let mu = joint.mean();
    let cov = joint.covariance();
    let y = model.call(&mu)?[output];
    let grad = model.gradient(&mu)?;
    let hess = &model.hessian(&mu)?[output];
    let d = mu.len();
    let mut variance = 0.0;
    let mut correction = 0.0;
    for i in 0..d {
        for j in 0..d {
            variance += grad[(output, i)] * grad[(output, j)] * cov[(i, j)];
            correction += hess[(i, j)] * cov[(i, j)];
        }
    }
    if !variance.is_finite() || !correction.is_finite() {
        return Err(Error::Numerical("derivatives at the mean point are not finite".into()));
    }
    Ok(TaylorMoments {
        mean_first_order: y,
        mean_second_order: y + 0.5 * correction,
        variance,
        std: variance.max(0.0).sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

/// Sturges rule: `ceil(log2 n) + 1` bins.
pub fn sturges_bins(n: usize) -> usize {
    if n <= 1 {
        1
    } else {
        (n as f64).log2().ceil() as usize + 1
    }
}

impl Histogram {
    pub fn new(values: &[f64]) -> Histogram {
        let k = sturges_bins(values.len());
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if values.is_empty() {
            return Histogram {
                edges: vec![],
                counts: vec![],
            };
        }
        let width = if hi > lo { (hi - lo) / k as f64 } else { 1.0 };
        let edges: Vec<f64> = (0..=k).map(|i| lo + i as f64 * width).collect();
        let mut counts = vec![0u64; k];
        for &v in values {
            let b = (((v - lo) / width).floor() as usize).min(k - 1);
            counts[b] += 1;
        }
        Histogram { edges, counts }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CentralTendency {
    pub size: usize,
    pub mean: f64,
    pub std: f64,
    pub histogram: Histogram,
    #[serde(skip)]
    pub values: Vec<f64>,
}

/// Empirical moments of the output over `n` joint draws.
pub fn mc_central_tendency(
    model: &Model,
    joint: &JointDistribution,
    output: usize,
    n: usize,
    rng: &mut RngStream,
) -> Result<CentralTendency> {
    if n < 2 {
        return invalid("central tendency needs at least two draws");
    }
    if output >= model.output_dim() {
        return invalid(format!("output {output} out of range"));
    }
    let x = joint.sample(n, rng);
    let values = model.evaluate(&x)?.column(output);
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok(CentralTendency {
        size: n,
        mean,
        std: var.sqrt(),
        histogram: Histogram::new(&values),
        values,
    })
}
