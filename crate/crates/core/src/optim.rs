//! Small unconstrained and box-constrained minimizers.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn fd_grad(f: &mut dyn FnMut(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    let mut y = x.to_vec();
    for i in 0..x.len() {
        let h = 1e-6 * x[i].abs().max(1.0);
        y[i] = x[i] + h;
        let fp = f(&y);
        y[i] = x[i] - h;
        let fm = f(&y);
        y[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    g
}

/// BFGS with central-difference gradients and Armijo backtracking. Non-finite
/// objective values are treated as +infinity, which keeps the search inside the
/// domain of definition.
pub fn bfgs(mut f: impl FnMut(&[f64]) -> f64, x0: &[f64], max_iter: usize, gtol: f64) -> Minimum {
    let mut obj = |x: &[f64]| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let n = x0.len();
    let mut x = DVector::from_column_slice(x0);
    let mut fx = obj(x.as_slice());
    let mut g = DVector::from_vec(fd_grad(&mut obj, x.as_slice()));
    let mut hinv = DMatrix::<f64>::identity(n, n);
    for it in 0..max_iter {
        if g.amax() < gtol * (1.0 + fx.abs()) {
            return Minimum {
                x: x.as_slice().to_vec(),
                value: fx,
                iterations: it,
                converged: true,
            };
        }
        let mut p = -(&hinv * &g);
        if p.dot(&g) >= 0.0 {
            hinv = DMatrix::identity(n, n);
            p = -g.clone();
        }
        let slope = p.dot(&g);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let xn = &x + &p * t;
            let fnew = obj(xn.as_slice());
            if fnew <= fx + 1e-4 * t * slope {
                accepted = Some((xn, fnew));
                break;
            }
            t *= 0.5;
        }
        let Some((xn, fnew)) = accepted else {
            // No descent possible at working precision.
            return Minimum {
                x: x.as_slice().to_vec(),
                value: fx,
                iterations: it,
                converged: true,
            };
        };
        let gn = DVector::from_vec(fd_grad(&mut obj, xn.as_slice()));
        let s = &xn - &x;
        let y = &gn - &g;
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            let rho = 1.0 / sy;
            let i = DMatrix::<f64>::identity(n, n);
            let a = &i - &s * y.transpose() * rho;
            let b = &i - &y * s.transpose() * rho;
            hinv = &a * &hinv * &b + &s * s.transpose() * rho;
        }
        let small_step = (fx - fnew).abs() <= 1e-14 * (1.0 + fx.abs()) && s.amax() < 1e-12;
        x = xn;
        fx = fnew;
        g = gn;
        if small_step {
            return Minimum {
                x: x.as_slice().to_vec(),
                value: fx,
                iterations: it + 1,
                converged: true,
            };
        }
    }
    Minimum {
        x: x.as_slice().to_vec(),
        value: fx,
        iterations: max_iter,
        converged: false,
    }
}

/// Projection of `x` on the box.
pub fn project(x: &mut [f64], lower: &[f64], upper: &[f64]) {
    for ((v, l), u) in x.iter_mut().zip(lower).zip(upper) {
        *v = v.clamp(*l, *u);
    }
}

/// Norm of the projected gradient step `x - P(x - g)`.
pub fn projected_gradient_norm(x: &[f64], g: &[f64], lower: &[f64], upper: &[f64]) -> f64 {
    x.iter()
        .zip(g)
        .zip(lower.iter().zip(upper))
        .map(|((xi, gi), (l, u))| {
            let d = xi - (xi - gi).clamp(*l, *u);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Projected gradient descent with Armijo backtracking along the projection arc.
/// `fg` returns the objective and its gradient. Stops when the projected-gradient
/// norm falls below `tol` or after `max_iter` iterations.
pub fn projected_gradient(
    mut fg: impl FnMut(&[f64]) -> crate::Result<(f64, Vec<f64>)>,
    x0: &[f64],
    lower: &[f64],
    upper: &[f64],
    tol: f64,
    max_iter: usize,
) -> crate::Result<Minimum> {
    let mut x = x0.to_vec();
    project(&mut x, lower, upper);
    let (mut fx, mut g) = fg(&x)?;
    let mut step: f64 = 1.0;
    for it in 0..max_iter {
        if projected_gradient_norm(&x, &g, lower, upper) < tol {
            return Ok(Minimum {
                x,
                value: fx,
                iterations: it,
                converged: true,
            });
        }
        // Initial step scaled to the box so the first trial moves a sensible amount.
        let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        let width = lower
            .iter()
            .zip(upper)
            .map(|(l, u)| (u - l).abs())
            .filter(|w| w.is_finite())
            .fold(0.0, f64::max)
            .max(1.0);
        let mut t = (step * 2.0).min(width / gnorm.max(1e-300));
        let mut moved = false;
        for _ in 0..60 {
            let mut xn: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - t * gi).collect();
            project(&mut xn, lower, upper);
            let decrease: f64 = g.iter().zip(x.iter().zip(&xn)).map(|(gi, (a, b))| gi * (a - b)).sum();
            if let Ok((fnew, gn)) = fg(&xn) {
                if fnew <= fx - 1e-4 * decrease {
                    let stalled = xn.iter().zip(&x).all(|(a, b)| a == b);
                    x = xn;
                    fx = fnew;
                    g = gn;
                    step = t;
                    moved = !stalled;
                    break;
                }
            }
            t *= 0.5;
        }
        if !moved {
            let converged = projected_gradient_norm(&x, &g, lower, upper) < tol;
            return Ok(Minimum {
                x,
                value: fx,
                iterations: it,
                converged,
            });
        }
    }
    let converged = projected_gradient_norm(&x, &g, lower, upper) < tol;
    Ok(Minimum {
        x,
        value: fx,
        iterations: max_iter,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bfgs_rosenbrock() {
        let m = bfgs(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
            500,
            1e-10,
        );
        assert!((m.x[0] - 1.0).abs() < 1e-4 && (m.x[1] - 1.0).abs() < 1e-4, "{m:?}");
    }

    #[test]
    fn projected_gradient_on_box() {
        let c = [0.3, -0.7];
        let m = projected_gradient(
            |x| {
                Ok((
                    (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2),
                    vec![2.0 * (x[0] - c[0]), 2.0 * (x[1] - c[1])],
                ))
            },
            &[0.9, 0.9],
            &[-1.0, -1.0],
            &[1.0, 1.0],
            1e-10,
            200,
        )
        .unwrap();
        assert!((m.x[0] - c[0]).abs() < 1e-6 && (m.x[1] - c[1]).abs() < 1e-6);
        let lin = projected_gradient(|x| Ok((x[0] - 2.0 * x[1], vec![1.0, -2.0])), &[0.0, 0.0], &[-1.0, -1.0], &[1.0, 1.0], 1e-8, 200).unwrap();
        assert_eq!(lin.x, vec![-1.0, 1.0]);
    }
}
