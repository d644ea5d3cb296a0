use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::norm_cdf;
use crate::transform::StandardEvent;

#[derive(Debug, Clone)]
pub struct FormSettings {
    pub start: Option<Vec<f64>>,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for FormSettings {
    fn default() -> Self {
        FormSettings {
            start: None,
            max_iterations: 100,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormResult {
    pub design_point_u: Vec<f64>,
    pub design_point_x: Vec<f64>,
    pub beta: f64,
    pub pf: f64,
    /// `α = -∇g_U(u*) / ‖∇g_U(u*)‖`.
    pub alpha: Vec<f64>,
    /// `α_i²`, summing to one.
    pub importance_factors: Vec<f64>,
    pub iterations: usize,
    pub evaluations: u64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Limit state in the usual sign convention: `G = -g_U`, failure when `G <= 0`.
fn limit_state(event: &StandardEvent, u: &[f64]) -> Result<(f64, Vec<f64>)> {
    let (g, grad) = event.value_gradient(u)?;
    Ok((-g, grad.into_iter().map(|v| -v).collect()))
}

/// Design point by the improved HLRF iteration: HLRF direction, step length chosen by
/// backtracking on the merit function `½‖u‖² + c|G(u)|` with `c = 2‖u‖/‖∇G‖ + 10`.
pub fn form(event: &StandardEvent, settings: &FormSettings) -> Result<FormResult> {
    let d = event.dim();
    let evaluations0 = event.evaluations();
    let mut u = settings.start.clone().unwrap_or_else(|| vec![0.0; d]);
    if u.len() != d {
        return Err(Error::Dimension {
            expected: d,
            found: u.len(),
        });
    }
    let g_origin = if u.iter().all(|&v| v == 0.0) {
        None
    } else {
        Some(-event.value(&vec![0.0; d])?)
    };
    let (mut g, mut grad) = limit_state(event, &u)?;
    let g_origin = g_origin.unwrap_or(g);
    let scale = if g.abs() > 0.0 { g.abs() } else { 1.0 };
    let tol = settings.tolerance;
    for it in 0..settings.max_iterations {
        let gn = norm(&grad);
        if !(gn > 0.0) {
            return Err(Error::Numerical(format!("zero limit-state gradient at iteration {it}")));
        }
        let coef = (dot(&grad, &u) - g) / (gn * gn);
        let dir: Vec<f64> = grad.iter().zip(&u).map(|(gi, ui)| coef * gi - ui).collect();
        let c = 2.0 * norm(&u) / gn + 10.0;
        let merit = |u: &[f64], g: f64| 0.5 * dot(u, u) + c * g.abs();
        let m0 = merit(&u, g);
        // Directional derivative of the merit function along the HLRF direction.
        let slope: f64 = dir
            .iter()
            .zip(u.iter().zip(&grad))
            .map(|(di, (ui, gi))| di * (ui + c * g.signum() * gi))
            .sum();
        let mut step = 1.0;
        let mut next = None;
        for _ in 0..30 {
            let cand: Vec<f64> = u.iter().zip(&dir).map(|(ui, di)| ui + step * di).collect();
            match limit_state(event, &cand) {
                Ok((gc, gradc)) if gc.is_finite() => {
                    if merit(&cand, gc) <= m0 + 1e-4 * step * slope.min(0.0) {
                        next = Some((cand, gc, gradc));
                        break;
                    }
                }
                _ => {}
            }
            step *= 0.5;
        }
        let Some((un, gnew, gradn)) = next else {
            return Err(Error::Convergence(format!("line search failed at iteration {it}")));
        };
        let moved = norm(&un.iter().zip(&u).map(|(a, b)| a - b).collect::<Vec<_>>());
        u = un;
        g = gnew;
        grad = gradn;
        if moved < tol && g.abs() < tol * scale {
            return finish(event, u, grad, g_origin, it + 1, evaluations0);
        }
    }
    Err(Error::Convergence(format!(
        "FORM did not converge in {} iterations",
        settings.max_iterations
    )))
}

fn finish(
    event: &StandardEvent,
    u: Vec<f64>,
    grad: Vec<f64>,
    g_origin: f64,
    iterations: usize,
    evaluations0: u64,
) -> Result<FormResult> {
    let r = norm(&u);
    let beta = if g_origin > 0.0 { r } else { -r };
    let gn = norm(&grad);
    // ∇g_U = -∇G.
    let alpha: Vec<f64> = grad.iter().map(|v| v / gn).collect();
    let importance_factors = alpha.iter().map(|a| a * a).collect();
    let design_point_x = event.transform().from_standard(&u)?;
    Ok(FormResult {
        design_point_u: u,
        design_point_x,
        beta,
        pf: norm_cdf(-beta),
        alpha,
        importance_factors,
        iterations,
        evaluations: event.evaluations() - evaluations0,
    })
}
