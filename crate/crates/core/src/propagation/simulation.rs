use crate::error::{invalid, Error, Result};
use crate::numeric::chi_sf;
use crate::rng::RngStream;
use crate::sample::Sample;
use crate::transform::StandardEvent;

use super::{Accumulator, ReliabilityResult};

#[derive(Debug, Clone)]
pub struct SamplingSettings {
    pub max_size: usize,
    /// Stop early once the coefficient of variation falls to this value.
    pub cv_target: Option<f64>,
    pub block_size: usize,
}

impl SamplingSettings {
    pub fn fixed(size: usize) -> Self {
        SamplingSettings {
            max_size: size,
            cv_target: None,
            block_size: 1000.min(size.max(1)),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.max_size == 0 || self.block_size == 0 {
            return invalid("sample size and block size must be positive");
        }
        Ok(())
    }

    fn reached(&self, acc: &Accumulator) -> bool {
        match self.cv_target {
            Some(cv) => {
                let m = acc.mean();
                m > 0.0 && acc.variance_of_mean().sqrt() / m <= cv
            }
            None => false,
        }
    }
}

/// Draws a block of standard normal points, row by row.
fn normal_block(n: usize, d: usize, shift: &[f64], rng: &mut RngStream) -> Sample {
    let mut data = Vec::with_capacity(n * d);
    for _ in 0..n {
        for s in shift {
            data.push(s + rng.normal());
        }
    }
    Sample::from_flat(d, data).expect("positive dimension")
}

/// Weighted indicator estimator over blocks of standard-space draws centred at `shift`.
fn weighted_estimator(
    method: &str,
    event: &StandardEvent,
    shift: &[f64],
    settings: &SamplingSettings,
    rng: &mut RngStream,
) -> Result<ReliabilityResult> {
    settings.validate()?;
    let d = event.dim();
    let evaluations0 = event.evaluations();
    let mut acc = Accumulator::default();
    let mut history = Vec::new();
    let shifted = shift.iter().any(|&s| s != 0.0);
    let shift_sq: f64 = shift.iter().map(|s| s * s).sum();
    while (acc.n as usize) < settings.max_size {
        let n = settings.block_size.min(settings.max_size - acc.n as usize);
        let u = normal_block(n, d, shift, rng);
        let g = event.values(&u)?;
        for (row, gi) in u.rows().zip(g) {
            if gi.is_nan() {
                return Err(Error::Numerical("limit state returned NaN".into()));
            }
            let w = if gi > 0.0 {
                if shifted {
                    // φ_d(u) / φ_d(u - u*) = exp(-u·u* + ½‖u*‖²).
                    let dot: f64 = row.iter().zip(shift).map(|(a, b)| a * b).sum();
                    (-dot + 0.5 * shift_sq).exp()
                } else {
                    1.0
                }
            } else {
                0.0
            };
            acc.push(w);
        }
        history.push(acc.history_point());
        if settings.reached(&acc) {
            break;
        }
    }
    let variance = if acc.n >= 2 { acc.variance_of_mean() } else { 0.0 };
    Ok(ReliabilityResult::clt(
        method,
        acc.mean(),
        variance,
        event.evaluations() - evaluations0,
        acc.n,
        history,
    ))
}

/// Crude Monte Carlo: proportion of standard-space draws inside the event.
pub fn mc_pf(event: &StandardEvent, settings: &SamplingSettings, rng: &mut RngStream) -> Result<ReliabilityResult> {
    weighted_estimator("monte_carlo", event, &vec![0.0; event.dim()], settings, rng)
}

/// Importance sampling with the standard normal density recentred at `center`
/// (usually the FORM design point).
pub fn importance_sampling_pf(
    event: &StandardEvent,
    center: &[f64],
    settings: &SamplingSettings,
    rng: &mut RngStream,
) -> Result<ReliabilityResult> {
    if center.len() != event.dim() {
        return Err(Error::Dimension {
            expected: event.dim(),
            found: center.len(),
        });
    }
    weighted_estimator("importance_sampling", event, center, settings, rng)
}

#[derive(Debug, Clone)]
pub struct DirectionalSettings {
    pub directions: usize,
    pub r_max: f64,
    pub step: f64,
    pub tolerance: f64,
    /// Directions evaluated per batch.
    pub block_size: usize,
}

impl Default for DirectionalSettings {
    fn default() -> Self {
        DirectionalSettings {
            directions: 1000,
            r_max: 8.0,
            step: 0.25,
            tolerance: 1e-6,
            block_size: 100,
        }
    }
}

/// Directional simulation. Along each direction the sign of `g_U(r a)` is scanned on
/// `r = 0, step, ..., r_max` and every sign change is refined by bisection; the
/// direction contributes the `χ_d` probability of its failure intervals, the last one
/// extending to infinity when the scan ends inside the event.
pub fn directional_sampling_pf(
    event: &StandardEvent,
    settings: &DirectionalSettings,
    rng: &mut RngStream,
) -> Result<ReliabilityResult> {
    if settings.directions == 0 || !(settings.step > 0.0) || !(settings.r_max > settings.step) {
        return invalid("directional sampling needs directions and a positive scan grid");
    }
    let d = event.dim();
    let evaluations0 = event.evaluations();
    let origin = event.value(&vec![0.0; d])?;
    let steps = (settings.r_max / settings.step).round() as usize;
    let radii: Vec<f64> = (1..=steps).map(|k| k as f64 * settings.step).collect();
    let mut acc = Accumulator::default();
    let mut history = Vec::new();
    let mut done = 0;
    let block = settings.block_size.max(1);
    while done < settings.directions {
        let n = block.min(settings.directions - done);
        let mut dirs = Vec::with_capacity(n);
        for _ in 0..n {
            let z: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
            let r = z.iter().map(|v| v * v).sum::<f64>().sqrt();
            dirs.push(z.into_iter().map(|v| v / r).collect::<Vec<f64>>());
        }
        // Scan grid for the whole block in one batch.
        let mut pts = Sample::new(d);
        for a in &dirs {
            for r in &radii {
                let p: Vec<f64> = a.iter().map(|v| v * r).collect();
                pts.push(&p)?;
            }
        }
        let g = event.values(&pts)?;
        for (k, a) in dirs.iter().enumerate() {
            let gs = &g[k * steps..(k + 1) * steps];
            let q = direction_probability(event, a, origin, &radii, gs, settings.tolerance, d)?;
            acc.push(q);
        }
        done += n;
        history.push(acc.history_point());
    }
    let mut result = ReliabilityResult::clt(
        "directional_sampling",
        acc.mean(),
        acc.variance_of_mean(),
        event.evaluations() - evaluations0,
        acc.n,
        history,
    );
    result.pf = result.pf.clamp(0.0, 1.0);
    Ok(result)
}

fn direction_probability(
    event: &StandardEvent,
    a: &[f64],
    origin: f64,
    radii: &[f64],
    g: &[f64],
    tol: f64,
    d: usize,
) -> Result<f64> {
    let at = |r: f64| -> Result<f64> {
        let p: Vec<f64> = a.iter().map(|v| v * r).collect();
        event.value(&p)
    };
    let mut q = 0.0;
    let mut prev_r = 0.0;
    let mut prev_g = origin;
    let mut entry = if origin > 0.0 { Some(0.0) } else { None };
    for (&r, &gr) in radii.iter().zip(g) {
        if (prev_g > 0.0) != (gr > 0.0) {
            // Bisection on [prev_r, r].
            let (mut lo, mut hi) = (prev_r, r);
            let inside_lo = prev_g > 0.0;
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                if (at(mid)? > 0.0) == inside_lo {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let root = 0.5 * (lo + hi);
            match entry.take() {
                Some(start) => q += chi_sf(start, d) - chi_sf(root, d),
                None => entry = Some(root),
            }
        }
        prev_r = r;
        prev_g = gr;
    }
    if let Some(start) = entry {
        q += chi_sf(start, d);
    }
    Ok(q)
}
