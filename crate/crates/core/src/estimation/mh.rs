//! Bayesian calibration by random-walk Metropolis-Hastings.

use crate::error::{invalid, Error, Result};
use crate::joint::JointDistribution;
use crate::model::Model;
use crate::rng::RngStream;
use crate::sample::Sample;

/// Observed outputs `z_j = G(θ, x_j) + ε_j` with `ε_j ~ N(0, σ²)`.
#[derive(Debug, Clone)]
pub struct Observations {
    /// Experimental conditions `x_j`, one per observation; rows may be empty.
    pub conditions: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub noise_sd: f64,
}

#[derive(Debug, Clone)]
pub struct McmcSettings {
    pub steps: usize,
    pub burn_in: usize,
    /// Standard deviation of the Gaussian proposal, per parameter.
    pub proposal_scale: Vec<f64>,
    pub initial: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct McmcResult {
    /// Post-burn-in states.
    pub chain: Sample,
    pub acceptance_rate: f64,
}

fn log_posterior(
    model: &Model,
    prior: &JointDistribution,
    obs: &Observations,
    theta: &[f64],
    input: &mut Vec<f64>,
) -> Result<f64> {
    let lp = prior.log_pdf(theta)?;
    if lp == f64::NEG_INFINITY {
        return Ok(lp);
    }
    let mut ll = 0.0;
    for (row, &z) in obs.conditions.iter().zip(&obs.values) {
        input.clear();
        input.extend_from_slice(theta);
        input.extend_from_slice(row);
        let y = model.call(input)?[0];
        let r = (z - y) / obs.noise_sd;
        ll -= 0.5 * r * r;
    }
    Ok(lp + ll)
}

/// Random-walk Metropolis-Hastings on the posterior of `θ`. The model takes
/// `(θ, x)` as inputs and its first output is compared with the observations.
pub fn mh_calibrate(
    model: &Model,
    prior: &JointDistribution,
    obs: &Observations,
    settings: &McmcSettings,
    rng: &mut RngStream,
) -> Result<McmcResult> {
    let p = prior.dim();
    if settings.initial.len() != p || settings.proposal_scale.len() != p {
        return Err(Error::Dimension {
            expected: p,
            found: settings.initial.len().min(settings.proposal_scale.len()),
        });
    }
    for row in &obs.conditions {
        if model.input_dim() != p + row.len() {
            return Err(Error::Dimension {
                expected: p + row.len(),
                found: model.input_dim(),
            });
        }
    }
    if obs.values.len() != obs.conditions.len() {
        return invalid("one condition row per observed value is required");
    }
    if !(obs.noise_sd > 0.0) {
        return invalid("noise standard deviation must be positive");
    }
    if settings.proposal_scale.iter().any(|s| !(*s > 0.0)) {
        return invalid("proposal scales must be positive");
    }
    if settings.steps <= settings.burn_in {
        return invalid("chain length must exceed the burn-in");
    }
    let mut input = Vec::with_capacity(model.input_dim());
    let mut theta = settings.initial.clone();
    let mut current = log_posterior(model, prior, obs, &theta, &mut input)?;
    if current == f64::NEG_INFINITY {
        return invalid("the prior has zero density at the initial point");
    }
    let mut chain = Sample::with_labels(prior.labels().to_vec());
    let mut accepted = 0usize;
    let mut proposal = vec![0.0; p];
    for step in 0..settings.steps {
        for ((q, t), s) in proposal.iter_mut().zip(&theta).zip(&settings.proposal_scale) {
            *q = t + s * rng.normal();
        }
        let candidate = log_posterior(model, prior, obs, &proposal, &mut input)?;
        let u = rng.uniform();
        if candidate > f64::NEG_INFINITY && u.ln() < candidate - current {
            theta.copy_from_slice(&proposal);
            current = candidate;
            accepted += 1;
        }
        if step >= settings.burn_in {
            chain.push(&theta)?;
        }
    }
    Ok(McmcResult {
        chain,
        acceptance_rate: accepted as f64 / settings.steps as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::Univariate;

    #[test]
    fn rejects_zero_prior_density_start() {
        let prior = JointDistribution::independent(vec![Univariate::uniform(0.0, 1.0).unwrap()]).unwrap();
        let model = Model::from_expressions(&["t"], &["y"], &["t"]).unwrap();
        let obs = Observations {
            conditions: vec![],
            values: vec![],
            noise_sd: 1.0,
        };
        let settings = McmcSettings {
            steps: 10,
            burn_in: 0,
            proposal_scale: vec![0.1],
            initial: vec![2.0],
        };
        assert!(mh_calibrate(&model, &prior, &obs, &settings, &mut RngStream::new(0)).is_err());
    }
}
