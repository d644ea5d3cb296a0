//! Parametric fitting by maximum likelihood or by moments.

use serde::Serialize;

use crate::dist::Univariate;
use crate::error::{invalid, Error, Result};
use crate::numeric::{golden_section, EULER_GAMMA};
use crate::optim::bfgs;

/// Family to fit. Optional fields fix a parameter instead of estimating it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Normal,
    Uniform,
    Triangular,
    Gumbel,
    /// Known support `[a, b]`, or estimated from the sample extremes.
    Beta { bounds: Option<(f64, f64)> },
    Exponential { location: Option<f64> },
    Gamma { location: Option<f64> },
}

impl Family {
    pub fn from_name(name: &str) -> Option<Family> {
        Some(match name {
            "Normal" => Family::Normal,
            "Uniform" => Family::Uniform,
            "Triangular" => Family::Triangular,
            "Gumbel" => Family::Gumbel,
            "Beta" => Family::Beta { bounds: None },
            "Exponential" => Family::Exponential { location: None },
            "Gamma" => Family::Gamma { location: None },
            _ => return None,
        })
    }

    /// Number of estimated parameters.
    pub fn free_parameters(&self) -> usize {
        match self {
            Family::Normal | Family::Uniform | Family::Gumbel => 2,
            Family::Triangular => 3,
            Family::Beta { bounds } => 2 + if bounds.is_some() { 0 } else { 2 },
            Family::Exponential { location } => 1 + usize::from(location.is_none()),
            Family::Gamma { location } => 2 + usize::from(location.is_none()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FitMethod {
    Mle,
    Moments,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub distribution: Univariate,
    pub log_likelihood: f64,
    pub method: FitMethod,
}

struct Stats {
    n: f64,
    mean: f64,
    var: f64,
    min: f64,
    max: f64,
}

fn stats(data: &[f64], family: Family) -> Result<Stats> {
    let k = family.free_parameters();
    if data.len() < k + 1 {
        return invalid(format!(
            "fitting {family:?} needs at least {} points, got {}",
            k + 1,
            data.len()
        ));
    }
    if data.iter().any(|x| !x.is_finite()) {
        return invalid("sample contains non-finite values");
    }
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let var = data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    if !(var > 0.0) {
        return invalid("degenerate sample: zero variance");
    }
    let min = data.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = data.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(Stats {
        n,
        mean,
        var,
        min,
        max,
    })
}

pub fn log_likelihood(dist: &Univariate, data: &[f64]) -> f64 {
    data.iter().map(|&x| dist.log_pdf(x)).sum()
}

fn finish(distribution: Univariate, data: &[f64], method: FitMethod) -> Result<FitResult> {
    let log_likelihood = log_likelihood(&distribution, data);
    if method == FitMethod::Mle && !log_likelihood.is_finite() {
        return Err(Error::Numerical("fitted log-likelihood is not finite".into()));
    }
    Ok(FitResult {
        distribution,
        log_likelihood,
        method,
    })
}

const MAX_ITER: usize = 500;

fn minimize(f: impl FnMut(&[f64]) -> f64, x0: &[f64]) -> Result<Vec<f64>> {
    let m = bfgs(f, x0, MAX_ITER, 1e-9);
    if !m.converged {
        return Err(Error::Convergence(format!(
            "likelihood optimizer did not converge after {MAX_ITER} iterations"
        )));
    }
    Ok(m.x)
}

/// Support padding used when bounds are estimated from the sample extremes.
fn pad(s: &Stats) -> f64 {
    (s.max - s.min) / s.n
}

/// Maximum likelihood estimate.
pub fn fit_mle(family: Family, data: &[f64]) -> Result<FitResult> {
    let s = stats(data, family)?;
    let dist = match family {
        Family::Normal => {
            let sigma = (s.var * (s.n - 1.0) / s.n).sqrt();
            Univariate::normal(s.mean, sigma)?
        }
        Family::Uniform => Univariate::uniform(s.min, s.max)?,
        Family::Exponential { location } => {
            let gamma = location.unwrap_or(s.min);
            if s.min < gamma {
                return invalid("sample below the exponential location");
            }
            if !(s.mean > gamma) {
                return invalid("degenerate sample for the exponential family");
            }
            Univariate::exponential(1.0 / (s.mean - gamma), gamma)?
        }
        Family::Gumbel => {
            // Profile equation in alpha: 1/alpha = mean - sum x e^{-a x} / sum e^{-a x}.
            let score = |alpha: f64| {
                let w: Vec<f64> = data.iter().map(|x| (-alpha * (x - s.min)).exp()).collect();
                let sw: f64 = w.iter().sum();
                let swx: f64 = w.iter().zip(data).map(|(w, x)| w * x).sum();
                1.0 / alpha - s.mean + swx / sw
            };
            let a0 = std::f64::consts::PI / (6.0 * s.var).sqrt();
            let (mut lo, mut hi) = (a0 / 2.0, a0 * 2.0);
            let mut tries = 0;
            while score(lo) < 0.0 && tries < 60 {
                lo /= 2.0;
                tries += 1;
            }
            while score(hi) > 0.0 && tries < 120 {
                hi *= 2.0;
                tries += 1;
            }
            let alpha = crate::numeric::find_root(score, lo, hi, 1e-14)
                .ok_or_else(|| Error::Convergence("Gumbel likelihood equation".into()))?;
            let mean_w = data.iter().map(|x| (-alpha * (x - s.min)).exp()).sum::<f64>() / s.n;
            let beta = s.min - mean_w.ln() / alpha;
            Univariate::gumbel(alpha, beta)?
        }
        Family::Beta { bounds } => {
            let (a, b) = bounds.unwrap_or((s.min - pad(&s), s.max + pad(&s)));
            if s.min < a || s.max > b {
                return invalid("sample outside the Beta support");
            }
            let start = beta_moments(&s, a, b);
            let x = minimize(
                |v| {
                    let (p, q) = (v[0].exp(), v[1].exp());
                    let d = Univariate::Beta { r: p, t: p + q, a, b };
                    -log_likelihood(&d, data)
                },
                &[start.0.ln(), start.1.ln()],
            )?;
            let (p, q) = (x[0].exp(), x[1].exp());
            Univariate::beta(p, p + q, a, b)?
        }
        Family::Gamma { location } => match location {
            Some(gamma) => gamma_mle(data, gamma)?,
            None => {
                // Profile likelihood over the location below the sample minimum.
                let span = s.max - s.min;
                let nll = |g: f64| match gamma_mle(data, g) {
                    Ok(d) => -log_likelihood(&d, data),
                    Err(_) => f64::INFINITY,
                };
                let (g, _) = golden_section(nll, s.min - 10.0 * span, s.min - 1e-9 * span.max(1.0), 1e-8 * span);
                gamma_mle(data, g)?
            }
        },
        Family::Triangular => {
            // For a fixed support the likelihood in the mode peaks at an order statistic;
            // the support is optimized for each candidate mode.
            let mut sorted = data.to_vec();
            sorted.sort_by(f64::total_cmp);
            let stride = (sorted.len() / 200).max(1);
            let span = s.max - s.min;
            let mut best: Option<(f64, Univariate)> = None;
            for &m in sorted.iter().step_by(stride) {
                let nll = |v: &[f64]| {
                    let a = s.min - span * v[0].exp();
                    let b = s.max + span * v[1].exp();
                    let d = Univariate::Triangular { a, m, b };
                    -log_likelihood(&d, data)
                };
                let r = bfgs(nll, &[(0.01f64).ln(), (0.01f64).ln()], MAX_ITER, 1e-9);
                let a = s.min - span * r.x[0].exp();
                let b = s.max + span * r.x[1].exp();
                if best.as_ref().is_none_or(|(v, _)| r.value < *v) {
                    best = Some((r.value, Univariate::triangular(a, m, b)?));
                }
            }
            best.expect("non-empty sample").1
        }
    };
    finish(dist, data, FitMethod::Mle)
}

fn beta_moments(s: &Stats, a: f64, b: f64) -> (f64, f64) {
    let m = (s.mean - a) / (b - a);
    let v = s.var / ((b - a) * (b - a));
    let c = (m * (1.0 - m) / v - 1.0).max(1e-3);
    ((m * c).max(1e-3), ((1.0 - m) * c).max(1e-3))
}

fn gamma_mle(data: &[f64], gamma: f64) -> Result<Univariate> {
    if data.iter().any(|&x| x <= gamma) {
        return invalid("sample not above the Gamma location");
    }
    let n = data.len() as f64;
    let mean = data.iter().map(|x| x - gamma).sum::<f64>() / n;
    let mean_log = data.iter().map(|x| (x - gamma).ln()).sum::<f64>() / n;
    let s = mean.ln() - mean_log;
    if !(s > 0.0) {
        return invalid("degenerate sample for the Gamma family");
    }
    // ln k - digamma(k) = s, Newton from the Minka approximation.
    let mut k = (3.0 - s + ((s - 3.0).powi(2) + 24.0 * s).sqrt()) / (12.0 * s);
    for _ in 0..100 {
        let f = k.ln() - statrs::function::gamma::digamma(k) - s;
        let df = 1.0 / k - trigamma(k);
        let next = k - f / df;
        let next = if next > 0.0 { next } else { k / 2.0 };
        if (next - k).abs() < 1e-14 * k {
            k = next;
            break;
        }
        k = next;
    }
    Univariate::gamma(k, k / mean, gamma)
}

fn trigamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 6.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let x2 = 1.0 / (x * x);
    acc + 1.0 / x + x2 / 2.0 + x2 / x * (1.0 / 6.0 - x2 * (1.0 / 30.0 - x2 / 42.0))
}

/// Moment-matching estimate.
pub fn fit_moments(family: Family, data: &[f64]) -> Result<FitResult> {
    let s = stats(data, family)?;
    let sd = s.var.sqrt();
    let dist = match family {
        Family::Normal => Univariate::normal(s.mean, sd)?,
        Family::Uniform => Univariate::uniform(s.mean - 3f64.sqrt() * sd, s.mean + 3f64.sqrt() * sd)?,
        Family::Exponential { location } => match location {
            Some(g) => {
                if !(s.mean > g) {
                    return invalid("sample mean not above the exponential location");
                }
                Univariate::exponential(1.0 / (s.mean - g), g)?
            }
            None => Univariate::exponential(1.0 / sd, s.mean - sd)?,
        },
        Family::Gumbel => {
            let alpha = std::f64::consts::PI / (sd * 6f64.sqrt());
            Univariate::gumbel(alpha, s.mean - EULER_GAMMA / alpha)?
        }
        Family::Beta { bounds } => {
            let (a, b) = bounds.unwrap_or((s.min - pad(&s), s.max + pad(&s)));
            let (p, q) = beta_moments(&s, a, b);
            Univariate::beta(p, p + q, a, b)?
        }
        Family::Gamma { location } => match location {
            Some(g) => {
                let m = s.mean - g;
                if !(m > 0.0) {
                    return invalid("sample mean not above the Gamma location");
                }
                Univariate::gamma(m * m / s.var, m / s.var, g)?
            }
            None => {
                let skew = data.iter().map(|x| ((x - s.mean) / sd).powi(3)).sum::<f64>() / s.n;
                if !(skew > 0.0) {
                    return invalid("Gamma moments fit needs a positively skewed sample");
                }
                let k = 4.0 / (skew * skew);
                let lambda = k.sqrt() / sd;
                Univariate::gamma(k, lambda, s.mean - k / lambda)?
            }
        },
        Family::Triangular => {
            // Support from the padded extremes; the mode matches the mean.
            let (a, b) = (s.min - pad(&s), s.max + pad(&s));
            let m = (3.0 * s.mean - a - b).clamp(a, b);
            Univariate::triangular(a, m, b)?
        }
    };
    finish(dist, data, FitMethod::Moments)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn normal_mle_closed_form() {
        let data = [1.0, 2.0, 4.0, 7.0];
        let r = fit_mle(Family::Normal, &data).unwrap();
        let Univariate::Normal { mu, sigma } = r.distribution else { panic!() };
        assert_eq!(mu, 3.5);
        let biased = (data.iter().map(|x| (x - 3.5f64).powi(2)).sum::<f64>() / 4.0).sqrt();
        assert!((sigma - biased).abs() < 1e-15);
    }

    #[test]
    fn exponential_moments_with_fixed_location() {
        let data = [0.5, 1.0, 2.5, 4.0];
        let r = fit_moments(Family::Exponential { location: Some(0.0) }, &data).unwrap();
        let Univariate::Exponential { lambda, .. } = r.distribution else { panic!() };
        assert!((lambda - 1.0 / 2.0).abs() < 1e-15);
    }

    #[test]
    fn recovers_parameters() {
        let mut rng = RngStream::new(3);
        let g = Univariate::gumbel(0.5, 2.0).unwrap();
        let data = g.sample(20_000, &mut rng);
        let Univariate::Gumbel { alpha, beta } = fit_mle(Family::Gumbel, &data).unwrap().distribution else { panic!() };
        assert!((alpha - 0.5).abs() < 0.02 && (beta - 2.0).abs() < 0.05);

        let gm = Univariate::gamma(2.5, 1.5, 0.0).unwrap();
        let data = gm.sample(20_000, &mut rng);
        let Univariate::Gamma { k, lambda, .. } = fit_mle(Family::Gamma { location: Some(0.0) }, &data).unwrap().distribution else { panic!() };
        assert!((k - 2.5).abs() < 0.1 && (lambda - 1.5).abs() < 0.07);

        let t = Univariate::triangular(1.0, 2.0, 4.0).unwrap();
        let data = t.sample(2_000, &mut rng);
        let Univariate::Triangular { a, m, b } = fit_mle(Family::Triangular, &data).unwrap().distribution else { panic!() };
        assert!((a - 1.0).abs() < 0.1 && (m - 2.0).abs() < 0.2 && (b - 4.0).abs() < 0.1, "{a} {m} {b}");
    }

    #[test]
    fn degenerate_and_small_samples() {
        assert!(fit_mle(Family::Normal, &[1.0, 1.0, 1.0]).is_err());
        assert!(fit_mle(Family::Normal, &[1.0, 2.0]).is_err());
    }
}
