use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::rng::RngStream;
use crate::sample::Sample;
use crate::transform::StandardEvent;

use super::{HistoryPoint, ReliabilityResult, Z95};

#[derive(Debug, Clone)]
pub struct SubsetSettings {
    /// Conditional survival fraction per step: the share of samples kept as seeds.
    pub p0: f64,
    pub n_per_step: usize,
    /// Width of the component-wise uniform proposal.
    pub proposal_range: f64,
    pub max_steps: usize,
}

impl Default for SubsetSettings {
    fn default() -> Self {
        SubsetSettings {
            p0: 0.1,
            n_per_step: 10_000,
            proposal_range: 2.0,
            max_steps: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetStep {
    /// Intermediate threshold on `g_U`; the last step uses 0.
    pub threshold: f64,
    pub probability: f64,
    pub acceptance_rate: f64,
    pub coefficient_of_variation: f64,
}

/// Subset simulation in standard space. Thresholds are empirical `p0`-quantiles of
/// `g_U`; conditional samples come from modified Metropolis chains started at the
/// seeds above the current threshold.
pub fn subset_sampling_pf(
    event: &StandardEvent,
    settings: &SubsetSettings,
    rng: &mut RngStream,
) -> Result<(ReliabilityResult, Vec<SubsetStep>)> {
    let n = settings.n_per_step;
    if !(settings.p0 > 0.0 && settings.p0 < 1.0) {
        return invalid("p0 must lie in (0, 1)");
    }
    let n_seeds = (settings.p0 * n as f64).round() as usize;
    if n_seeds == 0 || n_seeds >= n {
        return invalid("p0 * n_per_step must be between 1 and n_per_step - 1");
    }
    if !(settings.proposal_range > 0.0) || settings.max_steps == 0 {
        return invalid("proposal range and step budget must be positive");
    }
    let d = event.dim();
    let evaluations0 = event.evaluations();

    let mut data = Vec::with_capacity(n * d);
    for _ in 0..n * d {
        data.push(rng.normal());
    }
    let mut points = Sample::from_flat(d, data)?;
    let mut values = event.values(&points)?;
    // Chain membership of each sample, for the correlation estimate.
    let mut chains: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();

    let mut steps = Vec::new();
    let mut history = Vec::new();
    let mut warnings = Vec::new();
    let mut pf = 1.0;
    let mut cv_sq = 0.0;
    let mut acceptance = 1.0;
    loop {
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::Numerical("limit state returned NaN".into()));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
        let failures = values.iter().filter(|&&v| v > 0.0).count();
        let last = failures >= n_seeds || steps.len() + 1 == settings.max_steps;
        let threshold = if last {
            0.0
        } else {
            0.5 * (values[order[n_seeds - 1]] + values[order[n_seeds]])
        };
        let above: Vec<bool> = values.iter().map(|&v| v > threshold).collect();
        let count = above.iter().filter(|&&a| a).count();
        let p = count as f64 / n as f64;
        let gamma = chain_correlation(&chains, &above, p);
        let cv_step = if p > 0.0 {
            ((1.0 - p) / (n as f64 * p) * (1.0 + gamma)).sqrt()
        } else {
            f64::INFINITY
        };
        pf *= p;
        cv_sq += cv_step * cv_step;
        steps.push(SubsetStep {
            threshold,
            probability: p,
            acceptance_rate: acceptance,
            coefficient_of_variation: cv_step,
        });
        history.push(HistoryPoint {
            n: event.evaluations() - evaluations0,
            estimate: pf,
            half_width: Z95 * pf * cv_sq.sqrt(),
        });
        if last {
            if failures < n_seeds && steps.len() == settings.max_steps {
                warnings.push(format!("stopped after {} steps before reaching the threshold", settings.max_steps));
            }
            break;
        }
        if count == 0 {
            return Err(Error::Convergence("no sample above the intermediate threshold".into()));
        }

        // Seeds: every sample above the threshold, each grown into a chain.
        let seeds: Vec<usize> = order.iter().copied().filter(|&i| above[i]).collect();
        let lengths = chain_lengths(n, seeds.len());
        let mut current: Vec<Vec<f64>> = seeds.iter().map(|&i| points.row(i).to_vec()).collect();
        let mut current_g: Vec<f64> = seeds.iter().map(|&i| values[i]).collect();
        let mut new_rows: Vec<Vec<Vec<f64>>> = current.iter().map(|u| vec![u.clone()]).collect();
        let mut new_g: Vec<Vec<f64>> = current_g.iter().map(|&g| vec![g]).collect();
        let (mut proposed, mut accepted) = (0usize, 0usize);
        let max_len = lengths.iter().copied().max().unwrap_or(1);
        for k in 1..max_len {
            let active: Vec<usize> = (0..seeds.len()).filter(|&c| lengths[c] > k).collect();
            let mut candidates = Vec::with_capacity(active.len());
            let mut moved = Vec::with_capacity(active.len());
            for &c in &active {
                let (cand, any) = modified_metropolis(&current[c], settings.proposal_range, rng);
                candidates.push(cand);
                moved.push(any);
            }
            let mut batch = Sample::new(d);
            for (cand, &m) in candidates.iter().zip(&moved) {
                if m {
                    batch.push(cand)?;
                }
            }
            let g = if batch.is_empty() { Vec::new() } else { event.values(&batch)? };
            let mut gi = g.into_iter();
            for ((&c, cand), m) in active.iter().zip(candidates).zip(moved) {
                proposed += 1;
                if m {
                    let gc = gi.next().expect("one value per moved candidate");
                    if gc > threshold {
                        current[c] = cand;
                        current_g[c] = gc;
                        accepted += 1;
                    }
                }
                new_rows[c].push(current[c].clone());
                new_g[c].push(current_g[c]);
            }
        }
        acceptance = if proposed > 0 { accepted as f64 / proposed as f64 } else { 1.0 };
        if acceptance < 0.05 {
            warnings.push(format!(
                "step {}: MCMC acceptance rate {:.3} below 5%",
                steps.len() + 1,
                acceptance
            ));
        }
        let mut next = Sample::new(d);
        values = Vec::with_capacity(n);
        chains = Vec::with_capacity(seeds.len());
        for (rows, gs) in new_rows.into_iter().zip(new_g) {
            let start = values.len();
            for (r, g) in rows.iter().zip(gs) {
                next.push(r)?;
                values.push(g);
            }
            chains.push((start..values.len()).collect());
        }
        points = next;
    }

    let variance = (pf * pf * cv_sq).max(0.0);
    let mut result = ReliabilityResult::clt(
        "subset_sampling",
        pf,
        if variance.is_finite() { variance } else { 0.0 },
        event.evaluations() - evaluations0,
        (steps.len() * n) as u64,
        history,
    );
    result.warnings = warnings;
    Ok((result, steps))
}

/// Splits `n` samples over `chains` chains as evenly as possible.
fn chain_lengths(n: usize, chains: usize) -> Vec<usize> {
    let base = n / chains;
    let extra = n % chains;
    (0..chains).map(|c| base + usize::from(c < extra)).collect()
}

/// Component-wise proposal: each coordinate moves uniformly within `±range/2` and is
/// kept with the standard normal acceptance ratio.
fn modified_metropolis(u: &[f64], range: f64, rng: &mut RngStream) -> (Vec<f64>, bool) {
    let mut any = false;
    let cand = u
        .iter()
        .map(|&x| {
            let xi = x + range * (rng.uniform() - 0.5);
            let ratio = (-0.5 * (xi * xi - x * x)).exp();
            if rng.uniform() < ratio {
                any = true;
                xi
            } else {
                x
            }
        })
        .collect();
    (cand, any)
}

/// Correlation factor `γ` of the step estimator from the lag correlations of the
/// indicator along the chains.
fn chain_correlation(chains: &[Vec<usize>], above: &[bool], p: f64) -> f64 {
    let len = chains.iter().map(|c| c.len()).max().unwrap_or(1);
    if len < 2 || p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    let r0 = p * (1.0 - p);
    let mut gamma = 0.0;
    for lag in 1..len {
        let mut sum = 0.0;
        let mut pairs = 0usize;
        for c in chains {
            for w in 0..c.len().saturating_sub(lag) {
                if above[c[w]] && above[c[w + lag]] {
                    sum += 1.0;
                }
                pairs += 1;
            }
        }
        if pairs == 0 {
            break;
        }
        let rho = (sum / pairs as f64 - p * p) / r0;
        gamma += 2.0 * (1.0 - lag as f64 / len as f64) * rho;
    }
    gamma.max(0.0)
}
