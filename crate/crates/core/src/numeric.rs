//! Special functions, quadrature and scalar root finding.

use nalgebra::{DMatrix, SymmetricEigen};
use libm::erfc;
use statrs::function::erf::erfc_inv;

pub use statrs::function::beta::{beta_reg, ln_beta};
pub use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

pub const SQRT_2PI: f64 = 2.506_628_274_631_000_7;
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / SQRT_2PI
}

pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Inverse of the standard normal cdf; infinite at 0 and 1.
pub fn norm_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    if p > 0.5 {
        return -norm_quantile(1.0 - p);
    }
    let x = -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p);
    // One Halley step tightens the rational approximation to full precision.
    let e = norm_cdf(x) - p;
    let u = e / norm_pdf(x);
    if u.is_finite() {
        x - u / (1.0 + 0.5 * x * u)
    } else {
        x
    }
}

pub fn chi2_cdf(x: f64, dof: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        gamma_lr(0.5 * dof, 0.5 * x)
    }
}

pub fn chi2_sf(x: f64, dof: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        gamma_ur(0.5 * dof, 0.5 * x)
    }
}

/// Survival function of the chi distribution with `d` degrees of freedom.
pub fn chi_sf(r: f64, d: usize) -> f64 {
    if r <= 0.0 {
        1.0
    } else if r.is_infinite() {
        0.0
    } else {
        gamma_ur(0.5 * d as f64, 0.5 * r * r)
    }
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const G_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = GK_WEIGHTS[7] * fc;
    let mut gauss = G_WEIGHTS[3] * fc;
    for k in 0..7 {
        let dx = h * GK_NODES[k];
        let s = f(c - dx) + f(c + dx);
        kronrod += GK_WEIGHTS[k] * s;
        if k % 2 == 1 {
            gauss += G_WEIGHTS[k / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

/// Adaptive Gauss-Kronrod (7/15) integration over `[a, b]`; infinite bounds are mapped
/// to a finite interval.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> Integral {
    if a == b {
        return Integral {
            value: 0.0,
            error: 0.0,
            converged: true,
        };
    }
    if a > b {
        let r = integrate(f, b, a, tol);
        return Integral {
            value: -r.value,
            ..r
        };
    }
    match (a.is_finite(), b.is_finite()) {
        (true, true) => adaptive(&mut f, a, b, tol),
        (true, false) => {
            // x = a + t/(1-t), t in [0,1)
            let mut g = |t: f64| {
                if t >= 1.0 {
                    return 0.0;
                }
                let s = 1.0 - t;
                let v = f(a + t / s) / (s * s);
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            };
            adaptive(&mut g, 0.0, 1.0, tol)
        }
        (false, true) => {
            let mut g = |t: f64| {
                if t >= 1.0 {
                    return 0.0;
                }
                let s = 1.0 - t;
                let v = f(b - t / s) / (s * s);
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            };
            adaptive(&mut g, 0.0, 1.0, tol)
        }
        (false, false) => {
            // x = t/(1-t^2), t in (-1,1)
            let mut g = |t: f64| {
                let s = 1.0 - t * t;
                if s <= 0.0 {
                    return 0.0;
                }
                let v = f(t / s) * (1.0 + t * t) / (s * s);
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            };
            adaptive(&mut g, -1.0, 1.0, tol)
        }
    }
}

fn adaptive(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> Integral {
    const MAX_INTERVALS: usize = 4000;
    let (v, e) = gk15(f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    let mut total = v;
    let mut error = e;
    while error > tol.max(1e-15 * total.abs()) && intervals.len() < MAX_INTERVALS {
        let worst = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap();
        let (lo, hi, v, e) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // Cannot subdivide further at machine precision.
            intervals.push((lo, hi, v, 0.0));
            error -= e;
            continue;
        }
        let (v1, e1) = gk15(f, lo, mid);
        let (v2, e2) = gk15(f, mid, hi);
        total += v1 + v2 - v;
        error += e1 + e2 - e;
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
    // Re-sum to shed accumulated rounding from incremental updates.
    let value: f64 = intervals.iter().map(|t| t.2).sum();
    let error: f64 = intervals.iter().map(|t| t.3).sum();
    Integral {
        value,
        error,
        converged: error <= tol.max(1e-15 * value.abs()),
    }
}

/// Root of `f` on a bracket where the sign changes, by bisection with secant acceleration.
pub fn find_root(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> Option<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    // Illinois variant of regula falsi, falling back to bisection on stagnation.
    let mut side = 0;
    for _ in 0..200 {
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !c.is_finite() || c <= a.min(b) || c >= a.max(b) {
            c = 0.5 * (a + b);
        }
        let fc = f(c);
        if fc == 0.0 || (b - a).abs() < tol * (1.0 + c.abs()) {
            return Some(c);
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        if (b - a).abs() < tol * (1.0 + a.abs().max(b.abs())) {
            return Some(0.5 * (a + b));
        }
    }
    Some(0.5 * (a + b))
}

/// Solves `cdf(x) = p` for nondecreasing `cdf` on `[lo, hi]` using Newton steps
/// safeguarded by bisection. Bounds may be infinite; they are expanded from `guess`.
pub fn invert_cdf(
    cdf: impl Fn(f64) -> f64,
    pdf: impl Fn(f64) -> f64,
    p: f64,
    lo: f64,
    hi: f64,
    guess: f64,
) -> f64 {
    let mut a = lo;
    let mut b = hi;
    let mut step = guess.abs().max(1.0);
    if !a.is_finite() {
        a = guess.min(if b.is_finite() { b } else { guess }) - step;
        while cdf(a) > p {
            step *= 2.0;
            a -= step;
        }
    }
    step = guess.abs().max(1.0);
    if !b.is_finite() {
        b = guess.max(a) + step;
        while cdf(b) < p {
            step *= 2.0;
            b += step;
        }
    }
    let mut x = guess.clamp(a, b);
    for _ in 0..200 {
        let fx = cdf(x) - p;
        if fx == 0.0 {
            return x;
        }
        if fx < 0.0 {
            a = x;
        } else {
            b = x;
        }
        let d = pdf(x);
        let mut next = x - fx / d;
        if !(next > a && next < b) || !next.is_finite() {
            next = 0.5 * (a + b);
        }
        if (next - x).abs() <= 1e-15 * (1.0 + x.abs()) || (b - a) <= 4e-16 * (1.0 + x.abs()) {
            return next;
        }
        x = next;
    }
    x
}

/// Golden-section minimization of a unimodal function on `[a, b]`.
pub fn golden_section(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Gauss quadrature nodes and weights from three-term recurrence coefficients
/// (Golub-Welsch). `alpha` are the diagonal entries and `beta[k]` the squared
/// off-diagonal entries for `k >= 1`; `beta[0]` is the total mass of the measure.
pub fn gauss_rule(alpha: &[f64], beta: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = alpha.len();
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[j].sqrt()
        } else if j + 1 == i {
            beta[i].sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let v0 = eig.eigenvectors[(0, k)];
            (eig.eigenvalues[k], beta[0] * v0 * v0)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    pairs.into_iter().unzip()
}

/// Gauss-Hermite rule for the standard normal measure.
pub fn gauss_hermite_normal(n: usize) -> (Vec<f64>, Vec<f64>) {
    let alpha = vec![0.0; n];
    let beta: Vec<f64> = (0..n).map(|k| if k == 0 { 1.0 } else { k as f64 }).collect();
    gauss_rule(&alpha, &beta)
}

/// Gauss-Legendre rule on `[-1, 1]` with weights summing to 2.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let alpha = vec![0.0; n];
    let beta: Vec<f64> = (0..n)
        .map(|k| {
            if k == 0 {
                2.0
            } else {
                let k = k as f64;
                k * k / (4.0 * k * k - 1.0)
            }
        })
        .collect();
    gauss_rule(&alpha, &beta)
}

/// Bivariate standard normal cdf with correlation `rho`.
pub fn bivariate_normal_cdf(x: f64, y: f64, rho: f64) -> f64 {
    if x == f64::NEG_INFINITY || y == f64::NEG_INFINITY {
        return 0.0;
    }
    if x == f64::INFINITY {
        return norm_cdf(y);
    }
    if y == f64::INFINITY {
        return norm_cdf(x);
    }
    let base = norm_cdf(x) * norm_cdf(y);
    if rho == 0.0 {
        return base;
    }
    // Plackett: dF/dr equals the bivariate density at (x, y) with correlation r.
    let density = |r: f64| {
        let s = 1.0 - r * r;
        if s <= 0.0 {
            return 0.0;
        }
        (-(x * x - 2.0 * r * x * y + y * y) / (2.0 * s)).exp() / (2.0 * std::f64::consts::PI * s.sqrt())
    };
    let integral = integrate(density, 0.0, rho, 1e-13).value;
    (base + integral).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_quantile_inverts_cdf() {
        for &p in &[1e-12, 1e-6, 0.01, 0.3, 0.5, 0.77, 0.999, 1.0 - 1e-9] {
            let x = norm_quantile(p);
            assert!((norm_cdf(x) - p).abs() <= 1e-14 * p.max(1e-3), "p={p}");
        }
        assert!((norm_quantile(0.975) - 1.959_963_984_540_054).abs() < 1e-13);
    }

    #[test]
    fn quadrature_on_finite_and_infinite_ranges() {
        let r = integrate(|x| x.sin(), 0.0, std::f64::consts::PI, 1e-12);
        assert!((r.value - 2.0).abs() < 1e-12 && r.converged);
        let r = integrate(norm_pdf, f64::NEG_INFINITY, f64::INFINITY, 1e-12);
        assert!((r.value - 1.0).abs() < 1e-11);
        let r = integrate(|x| (-x).exp(), 0.0, f64::INFINITY, 1e-12);
        assert!((r.value - 1.0).abs() < 1e-11);
        let r = integrate(|x| x.sqrt(), 0.0, 1.0, 1e-12);
        assert!((r.value - 2.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn gauss_rules_integrate_polynomials() {
        let (x, w) = gauss_hermite_normal(5);
        let m4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
        assert!((m4 - 3.0).abs() < 1e-12);
        let (x, w) = gauss_legendre(4);
        let m6: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(6)).sum();
        assert!((m6 - 2.0 / 7.0).abs() < 1e-13);
    }

    #[test]
    fn bivariate_normal_known_values() {
        // Orthant probability: 1/4 + asin(rho)/(2 pi)
        let rho: f64 = 0.7;
        let expected = 0.25 + rho.asin() / (2.0 * std::f64::consts::PI);
        assert!((bivariate_normal_cdf(0.0, 0.0, rho) - expected).abs() < 1e-13);
        assert!((bivariate_normal_cdf(1.0, -0.5, 0.0) - norm_cdf(1.0) * norm_cdf(-0.5)).abs() < 1e-15);
    }

    #[test]
    fn root_and_inversion() {
        let r = find_root(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
        let x = invert_cdf(norm_cdf, norm_pdf, 0.9, f64::NEG_INFINITY, f64::INFINITY, 0.0);
        assert!((x - norm_quantile(0.9)).abs() < 1e-12);
    }
}
