use serde::{Deserialize, Serialize};

use crate::design::Design;
use crate::error::{invalid, Error, Result};
use crate::joint::JointDistribution;
use crate::model::Model;
use crate::optim::{project, projected_gradient};
use crate::rng::RngStream;
use crate::sample::Sample;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extremes {
    pub min: f64,
    pub argmin: Vec<f64>,
    pub max: f64,
    pub argmax: Vec<f64>,
    pub evaluations: usize,
}

/// Extremes of one output over a design. Unit-cube designs are pushed through the
/// marginal quantiles; stratified patterns are read in standardized coordinates,
/// `x_i = μ_i + σ_i p_i`.
pub fn minmax_doe(
    model: &Model,
    joint: &JointDistribution,
    output: usize,
    design: &Design,
    rng: &mut RngStream,
) -> Result<Extremes> {
    let d = joint.dim();
    if model.input_dim() != d {
        return Err(Error::Dimension {
            expected: d,
            found: model.input_dim(),
        });
    }
    let unit = design.generate(d, rng)?;
    if unit.dim() != d {
        return Err(Error::Dimension {
            expected: d,
            found: unit.dim(),
        });
    }
    let stratified = matches!(design, Design::Factorial(_) | Design::Axial(_) | Design::Composite(_));
    let (mu, sd) = (joint.mean(), joint.std());
    let mut x = Sample::with_labels(joint.labels().to_vec());
    for row in unit.rows() {
        let p: Vec<f64> = if stratified {
            (0..d).map(|i| mu[i] + sd[i] * row[i]).collect()
        } else {
            (0..d)
                .map(|i| joint.margin(i).quantile(row[i].clamp(1e-15, 1.0 - 1e-15)))
                .collect()
        };
        x.push(&p)?;
    }
    let y = model.evaluate(&x)?.column(output);
    let (mut imin, mut imax) = (0, 0);
    for (i, v) in y.iter().enumerate() {
        if v.is_nan() {
            return Err(Error::Evaluation {
                row: i,
                message: "model returned NaN".into(),
            });
        }
        if *v < y[imin] {
            imin = i;
        }
        if *v > y[imax] {
            imax = i;
        }
    }
    Ok(Extremes {
        min: y[imin],
        argmin: x.row(imin).to_vec(),
        max: y[imax],
        argmax: x.row(imax).to_vec(),
        evaluations: y.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Optimum {
    pub value: f64,
    pub point: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Bound-constrained optimum of one output by projected gradient with Armijo
/// backtracking; stops at projected-gradient norm `1e-6` or 200 iterations.
pub fn minmax_optimize(
    model: &Model,
    output: usize,
    lower: &[f64],
    upper: &[f64],
    start: &[f64],
    direction: Direction,
) -> Result<Optimum> {
    let d = model.input_dim();
    if lower.len() != d || upper.len() != d || start.len() != d {
        return Err(Error::Dimension {
            expected: d,
            found: start.len(),
        });
    }
    if lower.iter().zip(upper).any(|(l, u)| !(l <= u)) {
        return invalid("lower bounds must not exceed upper bounds");
    }
    if start.iter().zip(lower.iter().zip(upper)).any(|(x, (l, u))| x < l || x > u) {
        return invalid("start point lies outside the bounds");
    }
    let sign = match direction {
        Direction::Min => 1.0,
        Direction::Max => -1.0,
    };
    // Search in box-normalized coordinates so inputs of different magnitudes move
    // comparably; unbounded or degenerate directions keep their own scale.
    let scale: Vec<f64> = lower
        .iter()
        .zip(upper)
        .map(|(l, u)| if (u - l).is_finite() && u > l { u - l } else { 1.0 })
        .collect();
    let origin: Vec<f64> = lower
        .iter()
        .zip(start)
        .map(|(l, x)| if l.is_finite() { *l } else { *x })
        .collect();
    let to_x = |z: &[f64]| -> Vec<f64> { (0..d).map(|i| origin[i] + scale[i] * z[i]).collect() };
    let to_z = |x: &[f64]| -> Vec<f64> { (0..d).map(|i| (x[i] - origin[i]) / scale[i]).collect() };
    let m = projected_gradient(
        |z| {
            let x = to_x(z);
            let y = model.call(&x)?[output];
            let g = model.gradient(&x)?;
            Ok((sign * y, (0..d).map(|i| sign * g[(output, i)] * scale[i]).collect()))
        },
        &to_z(start),
        &to_z(lower),
        &to_z(upper),
        1e-9,
        500,
    )?;
    let mut point = to_x(&m.x);
    project(&mut point, lower, upper);
    Ok(Optimum {
        value: sign * m.value,
        point,
        iterations: m.iterations,
        converged: m.converged,
    })
}
