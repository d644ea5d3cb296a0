//! Univariate distributions.
//!
//! Construct values through the associated functions (`Univariate::normal`, ...),
//! which validate parameters. Sampling always inverts the cdf of a uniform draw so a
//! seeded stream fully determines the sample.

use std::f64::consts::PI;
use std::fmt;

use uq_expr::{derivative, parse, Expression};

use crate::error::{invalid, Error, Result};
use crate::estimation::KernelDensity;
use crate::numeric::{
    beta_reg, gamma_lr, gamma_ur, integrate, invert_cdf, ln_beta, ln_gamma, norm_cdf, norm_pdf,
    norm_quantile, EULER_GAMMA,
};
use crate::rng::RngStream;

#[derive(Debug, Clone)]
pub enum Univariate {
    Normal { mu: f64, sigma: f64 },
    Uniform { a: f64, b: f64 },
    Triangular { a: f64, m: f64, b: f64 },
    /// `F(x) = exp(-exp(-alpha (x - beta)))`, `alpha` a rate and `beta` the location.
    Gumbel { alpha: f64, beta: f64 },
    /// Shapes `(r, t - r)` on `[a, b]`.
    Beta { r: f64, t: f64, a: f64, b: f64 },
    Exponential { lambda: f64, gamma: f64 },
    Gamma { k: f64, lambda: f64, gamma: f64 },
    Dirac { value: f64 },
    Truncated(Box<Truncated>),
    Mixture(Mixture),
    Composite(Box<Composite>),
    Kernel(Box<KernelDensity>),
}

#[derive(Debug, Clone)]
pub struct Truncated {
    pub base: Univariate,
    pub lower: f64,
    pub upper: f64,
    cdf_lower: f64,
    mass: f64,
}

#[derive(Debug, Clone)]
pub struct Mixture {
    pub components: Vec<Univariate>,
    /// Normalized to sum to one.
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Composite {
    pub f: Expression,
    pub base: Univariate,
    increasing: bool,
    derivative: Option<Expression>,
    support: (f64, f64),
}

fn check(cond: bool, what: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        invalid(what.to_owned())
    }
}

fn finite(values: &[f64]) -> bool {
    values.iter().all(|v| v.is_finite())
}

impl Univariate {
    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        check(finite(&[mu, sigma]) && sigma > 0.0, "Normal requires sigma > 0")?;
        Ok(Univariate::Normal { mu, sigma })
    }

    pub fn standard_normal() -> Self {
        Univariate::Normal { mu: 0.0, sigma: 1.0 }
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        check(finite(&[a, b]) && a < b, "Uniform requires a < b")?;
        Ok(Univariate::Uniform { a, b })
    }

    pub fn triangular(a: f64, m: f64, b: f64) -> Result<Self> {
        check(
            finite(&[a, m, b]) && a < b && a <= m && m <= b,
            "Triangular requires a <= m <= b and a < b",
        )?;
        Ok(Univariate::Triangular { a, m, b })
    }

    pub fn gumbel(alpha: f64, beta: f64) -> Result<Self> {
        check(finite(&[alpha, beta]) && alpha > 0.0, "Gumbel requires alpha > 0")?;
        Ok(Univariate::Gumbel { alpha, beta })
    }

    pub fn beta(r: f64, t: f64, a: f64, b: f64) -> Result<Self> {
        check(
            finite(&[r, t, a, b]) && r > 0.0 && t > r && a < b,
            "Beta requires 0 < r < t and a < b",
        )?;
        Ok(Univariate::Beta { r, t, a, b })
    }

    pub fn exponential(lambda: f64, gamma: f64) -> Result<Self> {
        check(finite(&[lambda, gamma]) && lambda > 0.0, "Exponential requires lambda > 0")?;
        Ok(Univariate::Exponential { lambda, gamma })
    }

    pub fn gamma(k: f64, lambda: f64, gamma: f64) -> Result<Self> {
        check(
            finite(&[k, lambda, gamma]) && k > 0.0 && lambda > 0.0,
            "Gamma requires k > 0 and lambda > 0",
        )?;
        Ok(Univariate::Gamma { k, lambda, gamma })
    }

    pub fn dirac(value: f64) -> Result<Self> {
        check(value.is_finite(), "Dirac requires a finite value")?;
        Ok(Univariate::Dirac { value })
    }

    /// Restricts to `[lower, upper]`; absent bounds are infinite.
    pub fn truncate(self, lower: Option<f64>, upper: Option<f64>) -> Result<Self> {
        let lower = lower.unwrap_or(f64::NEG_INFINITY);
        let upper = upper.unwrap_or(f64::INFINITY);
        check(lower < upper, "empty truncation interval")?;
        let cdf_lower = if lower.is_finite() { self.cdf(lower) } else { 0.0 };
        let cdf_upper = if upper.is_finite() { self.cdf(upper) } else { 1.0 };
        let mass = cdf_upper - cdf_lower;
        if !(mass > 1e-12) {
            return invalid(format!("truncation to [{lower}, {upper}] keeps no probability mass"));
        }
        Ok(Univariate::Truncated(Box::new(Truncated {
            base: self,
            lower,
            upper,
            cdf_lower,
            mass,
        })))
    }

    /// Weighted mixture; weights are normalized.
    pub fn mixture(components: Vec<Univariate>, weights: Vec<f64>) -> Result<Self> {
        check(!components.is_empty(), "mixture needs at least one component")?;
        check(components.len() == weights.len(), "one weight per component")?;
        check(
            weights.iter().all(|w| w.is_finite() && *w > 0.0),
            "mixture weights must be positive",
        )?;
        let total: f64 = weights.iter().sum();
        Ok(Univariate::Mixture(Mixture {
            components,
            weights: weights.iter().map(|w| w / total).collect(),
        }))
    }

    /// Law of `f(X)` for `X ~ base`, with `f` strictly monotone on the support of `base`.
    /// `formula` is an expression of the single variable `variable`.
    pub fn composite(formula: &str, variable: &str, base: Univariate) -> Result<Self> {
        let f = parse(formula, &[variable])?;
        Univariate::composite_expr(f, base)
    }

    pub fn composite_expr(f: Expression, base: Univariate) -> Result<Self> {
        check(f.input_dim() == 1, "composite map must have one input")?;
        let grid: Vec<f64> = (0..1024)
            .map(|i| base.quantile((i as f64 + 0.5) / 1024.0))
            .collect();
        let values = grid
            .iter()
            .map(|&x| f.eval(&[x]))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let increasing = values.windows(2).all(|w| w[1] > w[0]);
        let decreasing = values.windows(2).all(|w| w[1] < w[0]);
        if !(increasing || decreasing) {
            return invalid(format!("{f} is not strictly monotone on the support"));
        }
        let (lo, hi) = base.support();
        let edge = |x: f64, p: f64| {
            f.eval(&[x])
                .ok()
                .filter(|v| !v.is_nan())
                .unwrap_or_else(|| f.eval(&[base.quantile(p)]).unwrap_or(f64::NAN))
        };
        let fl = edge(lo, 1e-15);
        let fh = edge(hi, 1.0 - 1e-15);
        let support = if increasing { (fl, fh) } else { (fh, fl) };
        Ok(Univariate::Composite(Box::new(Composite {
            derivative: derivative(&f, 0).ok(),
            f,
            base,
            increasing,
            support,
        })))
    }

    /// Family name and parameters, for reports.
    pub fn describe(&self) -> (String, Vec<(String, f64)>) {
        let p = |pairs: &[(&str, f64)]| pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        match self {
            Univariate::Normal { mu, sigma } => ("Normal".into(), p(&[("mu", *mu), ("sigma", *sigma)])),
            Univariate::Uniform { a, b } => ("Uniform".into(), p(&[("a", *a), ("b", *b)])),
            Univariate::Triangular { a, m, b } => {
                ("Triangular".into(), p(&[("a", *a), ("m", *m), ("b", *b)]))
            }
            Univariate::Gumbel { alpha, beta } => {
                ("Gumbel".into(), p(&[("alpha", *alpha), ("beta", *beta)]))
            }
            Univariate::Beta { r, t, a, b } => {
                ("Beta".into(), p(&[("r", *r), ("t", *t), ("a", *a), ("b", *b)]))
            }
            Univariate::Exponential { lambda, gamma } => {
                ("Exponential".into(), p(&[("lambda", *lambda), ("gamma", *gamma)]))
            }
            Univariate::Gamma { k, lambda, gamma } => (
                "Gamma".into(),
                p(&[("k", *k), ("lambda", *lambda), ("gamma", *gamma)]),
            ),
            Univariate::Dirac { value } => ("Dirac".into(), p(&[("value", *value)])),
            Univariate::Truncated(t) => {
                let (name, mut params) = t.base.describe();
                params.push(("lower".into(), t.lower));
                params.push(("upper".into(), t.upper));
                (format!("Truncated{name}"), params)
            }
            Univariate::Mixture(m) => (
                "Mixture".into(),
                m.weights
                    .iter()
                    .enumerate()
                    .map(|(i, w)| (format!("w{i}"), *w))
                    .collect(),
            ),
            Univariate::Composite(c) => (format!("Composite[{}]", c.f), Vec::new()),
            Univariate::Kernel(k) => ("KernelSmoothing".into(), p(&[("bandwidth", k.bandwidth())])),
        }
    }

    /// Closed support interval (infinite ends allowed).
    pub fn support(&self) -> (f64, f64) {
        use Univariate::*;
        match self {
            Normal { .. } | Gumbel { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Uniform { a, b } | Triangular { a, b, .. } | Beta { a, b, .. } => (*a, *b),
            Exponential { gamma, .. } | Gamma { gamma, .. } => (*gamma, f64::INFINITY),
            Dirac { value } => (*value, *value),
            Truncated(t) => {
                let (lo, hi) = t.base.support();
                (lo.max(t.lower), hi.min(t.upper))
            }
            Mixture(m) => m.components.iter().map(|c| c.support()).fold(
                (f64::INFINITY, f64::NEG_INFINITY),
                |acc, s| (acc.0.min(s.0), acc.1.max(s.1)),
            ),
            Composite(c) => c.support,
            Kernel(k) => k.support(),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        use Univariate::*;
        match self {
            Normal { mu, sigma } => norm_pdf((x - mu) / sigma) / sigma,
            Uniform { a, b } => {
                if x >= *a && x <= *b {
                    1.0 / (b - a)
                } else {
                    0.0
                }
            }
            Triangular { a, m, b } => {
                if x < *a || x > *b {
                    0.0
                } else if x < *m {
                    2.0 * (x - a) / ((b - a) * (m - a))
                } else if *m < *b {
                    2.0 * (b - x) / ((b - a) * (b - m))
                } else {
                    2.0 / (b - a)
                }
            }
            Gumbel { alpha, beta } => {
                let z = alpha * (x - beta);
                alpha * (-z - (-z).exp()).exp()
            }
            Beta { .. } | Gamma { .. } => self.log_pdf(x).exp(),
            Exponential { lambda, gamma } => {
                if x < *gamma {
                    0.0
                } else {
                    lambda * (-lambda * (x - gamma)).exp()
                }
            }
            Dirac { value } => {
                if x == *value {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
            Truncated(t) => {
                if x < t.lower || x > t.upper {
                    0.0
                } else {
                    t.base.pdf(x) / t.mass
                }
            }
            Mixture(m) => m.components.iter().zip(&m.weights).map(|(c, w)| w * c.pdf(x)).sum(),
            Composite(c) => c.pdf(x),
            Kernel(k) => k.pdf(x),
        }
    }

    /// Natural logarithm of the density; closed forms avoid underflow in the tails.
    pub fn log_pdf(&self, x: f64) -> f64 {
        use Univariate::*;
        match self {
            Normal { mu, sigma } => {
                let z = (x - mu) / sigma;
                -0.5 * z * z - sigma.ln() - 0.5 * (2.0 * PI).ln()
            }
            Gumbel { alpha, beta } => {
                let z = alpha * (x - beta);
                alpha.ln() - z - (-z).exp()
            }
            Beta { r, t, a, b } => {
                if x <= *a || x >= *b {
                    // Boundary values are finite only for shapes equal to one.
                    return self.beta_boundary_pdf(x).ln();
                }
                let (p, q) = (*r, t - r);
                (p - 1.0) * (x - a).ln() + (q - 1.0) * (b - x).ln()
                    - ln_beta(p, q)
                    - (p + q - 1.0) * (b - a).ln()
            }
            Exponential { lambda, gamma } => {
                if x < *gamma {
                    f64::NEG_INFINITY
                } else {
                    lambda.ln() - lambda * (x - gamma)
                }
            }
            Gamma { k, lambda, gamma } => {
                let y = x - gamma;
                if y < 0.0 {
                    f64::NEG_INFINITY
                } else if y == 0.0 {
                    match k.partial_cmp(&1.0) {
                        Some(std::cmp::Ordering::Less) => f64::INFINITY,
                        Some(std::cmp::Ordering::Equal) => lambda.ln(),
                        _ => f64::NEG_INFINITY,
                    }
                } else {
                    k * lambda.ln() + (k - 1.0) * y.ln() - lambda * y - ln_gamma(*k)
                }
            }
            Truncated(t) => {
                if x < t.lower || x > t.upper {
                    f64::NEG_INFINITY
                } else {
                    t.base.log_pdf(x) - t.mass.ln()
                }
            }
            _ => self.pdf(x).ln(),
        }
    }

    fn beta_boundary_pdf(&self, x: f64) -> f64 {
        let Univariate::Beta { r, t, a, b } = self else { unreachable!() };
        let (p, q) = (*r, t - r);
        let at_a = x == *a;
        let at_b = x == *b;
        let shape = if at_a { p } else if at_b { q } else { return 0.0 };
        match shape.partial_cmp(&1.0) {
            Some(std::cmp::Ordering::Less) => f64::INFINITY,
            Some(std::cmp::Ordering::Equal) => {
                (-ln_beta(p, q) - (p + q - 1.0) * (b - a).ln()).exp()
                    * if at_a { (b - a).powf(q - 1.0) } else { (b - a).powf(p - 1.0) }
            }
            _ => 0.0,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        use Univariate::*;
        match self {
            Normal { mu, sigma } => norm_cdf((x - mu) / sigma),
            Uniform { a, b } => ((x - a) / (b - a)).clamp(0.0, 1.0),
            Triangular { a, m, b } => {
                if x <= *a {
                    0.0
                } else if x >= *b {
                    1.0
                } else if x <= *m {
                    (x - a) * (x - a) / ((b - a) * (m - a))
                } else {
                    1.0 - (b - x) * (b - x) / ((b - a) * (b - m))
                }
            }
            Gumbel { alpha, beta } => (-(-alpha * (x - beta)).exp()).exp(),
            Beta { r, t, a, b } => {
                if x <= *a {
                    0.0
                } else if x >= *b {
                    1.0
                } else {
                    beta_reg(*r, t - r, (x - a) / (b - a))
                }
            }
            Exponential { lambda, gamma } => {
                if x <= *gamma {
                    0.0
                } else {
                    -(-lambda * (x - gamma)).exp_m1()
                }
            }
            Gamma { k, lambda, gamma } => {
                if x <= *gamma {
                    0.0
                } else {
                    gamma_lr(*k, lambda * (x - gamma))
                }
            }
            Dirac { value } => {
                if x >= *value {
                    1.0
                } else {
                    0.0
                }
            }
            Truncated(t) => {
                if x <= t.lower {
                    0.0
                } else if x >= t.upper {
                    1.0
                } else {
                    ((t.base.cdf(x) - t.cdf_lower) / t.mass).clamp(0.0, 1.0)
                }
            }
            Mixture(m) => m.components.iter().zip(&m.weights).map(|(c, w)| w * c.cdf(x)).sum(),
            Composite(c) => c.cdf(x),
            Kernel(k) => k.cdf(x),
        }
    }

    /// `1 - cdf(x)`, accurate in the upper tail where closed forms allow.
    pub fn sf(&self, x: f64) -> f64 {
        use Univariate::*;
        match self {
            Normal { mu, sigma } => norm_cdf(-(x - mu) / sigma),
            Gumbel { alpha, beta } => -(-(-alpha * (x - beta)).exp()).exp_m1(),
            Exponential { lambda, gamma } => {
                if x <= *gamma {
                    1.0
                } else {
                    (-lambda * (x - gamma)).exp()
                }
            }
            Gamma { k, lambda, gamma } => {
                if x <= *gamma {
                    1.0
                } else {
                    gamma_ur(*k, lambda * (x - gamma))
                }
            }
            Beta { r, t, a, b } => {
                if x <= *a {
                    1.0
                } else if x >= *b {
                    0.0
                } else {
                    beta_reg(t - r, *r, (b - x) / (b - a))
                }
            }
            Truncated(tr) => {
                if x <= tr.lower {
                    1.0
                } else if x >= tr.upper {
                    0.0
                } else {
                    let upper_tail = if tr.upper.is_finite() { tr.base.sf(tr.upper) } else { 0.0 };
                    ((tr.base.sf(x) - upper_tail) / tr.mass).clamp(0.0, 1.0)
                }
            }
            _ => 1.0 - self.cdf(x),
        }
    }

    /// Generalized inverse of the cdf; `p = 0` and `p = 1` give the support bounds.
    pub fn quantile(&self, p: f64) -> f64 {
        use Univariate::*;
        let (lo, hi) = self.support();
        if p <= 0.0 {
            return lo;
        }
        if p >= 1.0 {
            return hi;
        }
        match self {
            Normal { mu, sigma } => mu + sigma * norm_quantile(p),
            Uniform { a, b } => a + p * (b - a),
            Triangular { a, m, b } => {
                if p < (m - a) / (b - a) {
                    a + (p * (b - a) * (m - a)).sqrt()
                } else {
                    b - ((1.0 - p) * (b - a) * (b - m)).sqrt()
                }
            }
            Gumbel { alpha, beta } => beta - (-p.ln()).ln() / alpha,
            Exponential { lambda, gamma } => gamma - (-p).ln_1p() / lambda,
            Dirac { value } => *value,
            Beta { r, t, a, b } => {
                let guess = statrs::function::beta::inv_beta_reg(*r, t - r, p);
                let z = invert_cdf(
                    |z| beta_reg(*r, t - r, z.clamp(0.0, 1.0)),
                    |z| {
                        let u = Univariate::Beta { r: *r, t: *t, a: 0.0, b: 1.0 };
                        u.pdf(z)
                    },
                    p,
                    0.0,
                    1.0,
                    if guess.is_finite() { guess.clamp(0.0, 1.0) } else { 0.5 },
                );
                a + (b - a) * z
            }
            Gamma { k, lambda, gamma } => {
                // Wilson-Hilferty starting point.
                let z = norm_quantile(p);
                let c = 1.0 / (9.0 * k);
                let g = (k * (1.0 - c + z * c.sqrt()).powi(3)).max(1e-3 * k);
                let y = invert_cdf(
                    |y| if y <= 0.0 { 0.0 } else { gamma_lr(*k, y) },
                    |y| {
                        if y <= 0.0 {
                            0.0
                        } else {
                            ((k - 1.0) * y.ln() - y - ln_gamma(*k)).exp()
                        }
                    },
                    p,
                    0.0,
                    f64::INFINITY,
                    g,
                );
                gamma + y / lambda
            }
            Truncated(t) => {
                let q = t.base.quantile(t.cdf_lower + p * t.mass);
                q.clamp(t.lower, t.upper)
            }
            Composite(c) => c.quantile(p),
            Mixture(_) | Kernel(_) => {
                let guess = self.mean();
                invert_cdf(|x| self.cdf(x), |x| self.pdf(x), p, lo, hi, guess)
            }
        }
    }

    pub fn mean(&self) -> f64 {
        use Univariate::*;
        match self {
            Normal { mu, .. } => *mu,
            Uniform { a, b } => 0.5 * (a + b),
            Triangular { a, m, b } => (a + m + b) / 3.0,
            Gumbel { alpha, beta } => beta + EULER_GAMMA / alpha,
            Beta { r, t, a, b } => a + (b - a) * r / t,
            Exponential { lambda, gamma } => gamma + 1.0 / lambda,
            Gamma { k, lambda, gamma } => gamma + k / lambda,
            Dirac { value } => *value,
            Mixture(m) => m.components.iter().zip(&m.weights).map(|(c, w)| w * c.mean()).sum(),
            Kernel(k) => k.mean(),
            Truncated(_) | Composite(_) => self.numeric_moments().0,
        }
    }

    pub fn variance(&self) -> f64 {
        use Univariate::*;
        match self {
            Normal { sigma, .. } => sigma * sigma,
            Uniform { a, b } => (b - a) * (b - a) / 12.0,
            Triangular { a, m, b } => (a * a + m * m + b * b - a * b - a * m - b * m) / 18.0,
            Gumbel { alpha, .. } => PI * PI / (6.0 * alpha * alpha),
            Beta { r, t, a, b } => {
                let (p, q) = (*r, t - r);
                (b - a) * (b - a) * p * q / ((p + q) * (p + q) * (p + q + 1.0))
            }
            Exponential { lambda, .. } => 1.0 / (lambda * lambda),
            Gamma { k, lambda, .. } => k / (lambda * lambda),
            Dirac { .. } => 0.0,
            Mixture(m) => {
                let mean = self.mean();
                m.components
                    .iter()
                    .zip(&m.weights)
                    .map(|(c, w)| {
                        let mu = c.mean();
                        w * (c.variance() + mu * mu)
                    })
                    .sum::<f64>()
                    - mean * mean
            }
            Kernel(k) => k.variance(),
            Truncated(_) | Composite(_) => self.numeric_moments().1,
        }
    }

    pub fn std(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Mean and variance by adaptive quadrature; half-infinite supports are clipped at
    /// the 1e-12 and 1 - 1e-12 quantiles.
    pub fn numeric_moments(&self) -> (f64, f64) {
        let (mut lo, mut hi) = self.support();
        if !lo.is_finite() {
            lo = self.quantile(1e-12);
        }
        if !hi.is_finite() {
            hi = self.quantile(1.0 - 1e-12);
        }
        let scale = lo.abs().max(hi.abs()).max(1.0);
        let mass = integrate(|x| self.pdf(x), lo, hi, 1e-12).value;
        let mean = integrate(|x| x * self.pdf(x), lo, hi, 1e-10 * scale).value / mass;
        let var = integrate(|x| (x - mean).powi(2) * self.pdf(x), lo, hi, 1e-10 * scale * scale)
            .value
            / mass;
        (mean, var)
    }

    /// One draw by inversion (mixtures pick a component first).
    pub fn draw(&self, rng: &mut RngStream) -> f64 {
        match self {
            Univariate::Mixture(m) => {
                let u = rng.uniform();
                let mut acc = 0.0;
                for (c, w) in m.components.iter().zip(&m.weights) {
                    acc += w;
                    if u < acc {
                        return c.draw(rng);
                    }
                }
                m.components.last().unwrap().draw(rng)
            }
            _ => self.quantile(rng.uniform()),
        }
    }

    pub fn sample(&self, n: usize, rng: &mut RngStream) -> Vec<f64> {
        (0..n).map(|_| self.draw(rng)).collect()
    }

    pub fn is_continuous(&self) -> bool {
        match self {
            Univariate::Dirac { .. } => false,
            Univariate::Truncated(t) => t.base.is_continuous(),
            Univariate::Mixture(m) => m.components.iter().all(Univariate::is_continuous),
            Univariate::Composite(c) => c.base.is_continuous(),
            _ => true,
        }
    }
}

impl Composite {
    /// Antecedent of `y` under `f`, by bracketed bisection on the base support.
    fn inverse(&self, y: f64) -> Option<f64> {
        let (mut lo, mut hi) = self.base.support();
        if !lo.is_finite() {
            lo = self.base.quantile(1e-16);
        }
        if !hi.is_finite() {
            hi = self.base.quantile(1.0 - 1e-16);
        }
        let g = |x: f64| {
            let v = self.f.eval(&[x]).unwrap_or(f64::NAN);
            if self.increasing {
                v - y
            } else {
                y - v
            }
        };
        let (glo, ghi) = (g(lo), g(hi));
        if glo.is_nan() || ghi.is_nan() {
            return None;
        }
        if glo >= 0.0 {
            return Some(lo);
        }
        if ghi <= 0.0 {
            return Some(hi);
        }
        let (mut a, mut b) = (lo, hi);
        for _ in 0..400 {
            let mid = 0.5 * (a + b);
            if g(mid) < 0.0 {
                a = mid;
            } else {
                b = mid;
            }
            if (b - a) <= 1e-12 * a.abs().max(b.abs()).max(1e-300) {
                break;
            }
        }
        Some(0.5 * (a + b))
    }

    fn cdf(&self, y: f64) -> f64 {
        if y <= self.support.0 {
            return 0.0;
        }
        if y >= self.support.1 {
            return 1.0;
        }
        match self.inverse(y) {
            Some(x) if self.increasing => self.base.cdf(x),
            Some(x) => self.base.sf(x),
            None => f64::NAN,
        }
    }

    fn pdf(&self, y: f64) -> f64 {
        if y < self.support.0 || y > self.support.1 {
            return 0.0;
        }
        let Some(x) = self.inverse(y) else { return 0.0 };
        let slope = match &self.derivative {
            Some(d) => d.eval(&[x]).unwrap_or(f64::NAN),
            None => {
                let h = (1e-6 * x.abs()).max(1e-8);
                let fp = self.f.eval(&[x + h]).unwrap_or(f64::NAN);
                let fm = self.f.eval(&[x - h]).unwrap_or(f64::NAN);
                (fp - fm) / (2.0 * h)
            }
        };
        let v = self.base.pdf(x) / slope.abs();
        if v.is_finite() {
            v
        } else {
            0.0
        }
    }

    fn quantile(&self, p: f64) -> f64 {
        let x = if self.increasing {
            self.base.quantile(p)
        } else {
            self.base.quantile(1.0 - p)
        };
        self.f.eval(&[x]).unwrap_or(f64::NAN)
    }
}

impl fmt::Display for Univariate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (name, params) = self.describe();
        write!(f, "{name}(")?;
        for (i, (k, v)) in params.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}={v}")?;
        }
        f.write_str(")")
    }
}

/// Builds a family from its name and positional parameters, as used by configuration
/// files and estimation factories.
pub fn from_family(name: &str, params: &[f64]) -> Result<Univariate> {
    let need = |n: usize| -> Result<()> {
        if params.len() == n {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "{name} takes {n} parameters, got {}",
                params.len()
            )))
        }
    };
    match name {
        "Normal" => need(2).and_then(|_| Univariate::normal(params[0], params[1])),
        "Uniform" => need(2).and_then(|_| Univariate::uniform(params[0], params[1])),
        "Triangular" => need(3).and_then(|_| Univariate::triangular(params[0], params[1], params[2])),
        "Gumbel" => need(2).and_then(|_| Univariate::gumbel(params[0], params[1])),
        "Beta" => need(4).and_then(|_| Univariate::beta(params[0], params[1], params[2], params[3])),
        "Exponential" => need(2).and_then(|_| Univariate::exponential(params[0], params[1])),
        "Gamma" => need(3).and_then(|_| Univariate::gamma(params[0], params[1], params[2])),
        "Dirac" => need(1).and_then(|_| Univariate::dirac(params[0])),
        _ => Err(Error::InvalidParameter(format!(
            "unknown distribution family {name:?}; supported: {}",
            FAMILIES.join(", ")
        ))),
    }
}

pub const FAMILIES: [&str; 8] = [
    "Normal",
    "Uniform",
    "Triangular",
    "Gumbel",
    "Beta",
    "Exponential",
    "Gamma",
    "Dirac",
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        assert_eq!(Univariate::standard_normal().cdf(0.0), 0.5);
        let g = Univariate::gumbel(1.8e-3, 1014.0).unwrap();
        assert!((g.cdf(1014.0) - (-1f64).exp()).abs() < 1e-15);
        assert!((g.mean() - 1334.67).abs() < 0.01);
        let t = Univariate::triangular(47.6, 50.5, 52.4).unwrap();
        assert!((t.cdf(50.5) - 0.604_166_666_666_666_7).abs() < 1e-14);
        assert!((t.variance() - 17.53 / 18.0).abs() < 1e-12);
    }

    #[test]
    fn truncated_normal_mean() {
        let t = Univariate::normal(30.0, 7.5).unwrap().truncate(Some(0.0), None).unwrap();
        // Closed form: mu + sigma phi(a) / (1 - Phi(a)) with a = -4.
        let expected = 30.0 + 7.5 * norm_pdf(-4.0) / (1.0 - norm_cdf(-4.0));
        assert!((t.mean() - expected).abs() < 1e-8);
        let total = integrate(|x| t.pdf(x), 0.0, f64::INFINITY, 1e-12).value;
        assert!((total - 1.0).abs() < 1e-9);
        let id = Univariate::normal(1.0, 2.0).unwrap().truncate(None, None).unwrap();
        for x in [-3.0, 0.0, 2.5] {
            assert_eq!(id.cdf(x), norm_cdf((x - 1.0) / 2.0));
        }
        assert!(Univariate::normal(0.0, 1.0).unwrap().truncate(Some(50.0), None).is_err());
        assert!(Univariate::normal(0.0, 1.0).unwrap().truncate(Some(1.0), Some(1.0)).is_err());
    }

    #[test]
    fn mixtures() {
        let m = Univariate::mixture(vec![Univariate::standard_normal()], vec![7.0]).unwrap();
        assert_eq!(m.cdf(0.3), norm_cdf(0.3));
        let u = Univariate::mixture(
            vec![Univariate::uniform(0.0, 1.0).unwrap(), Univariate::uniform(1.0, 2.0).unwrap()],
            vec![1.0, 1.0],
        )
        .unwrap();
        assert_eq!(u.cdf(1.0), 0.5);
        let n = Univariate::mixture(
            vec![Univariate::normal(0.0, 1.0).unwrap(), Univariate::normal(4.0, 1.0).unwrap()],
            vec![0.3, 0.7],
        )
        .unwrap();
        assert!((n.mean() - 2.8).abs() < 1e-14);
    }

    #[test]
    fn composites() {
        let id = Univariate::composite("x", "x", Univariate::standard_normal()).unwrap();
        assert!((id.cdf(0.7) - norm_cdf(0.7)).abs() < 1e-12);
        let ln = Univariate::composite("exp(x)", "x", Univariate::standard_normal()).unwrap();
        assert!((ln.quantile(0.5) - 1.0).abs() < 1e-15);
        let dec = Univariate::composite("-x^3", "x", Univariate::uniform(-1.0, 1.0).unwrap()).unwrap();
        assert!((dec.cdf(-0.125) - 0.25).abs() < 1e-10);
        assert!(Univariate::composite("x^2", "x", Univariate::standard_normal()).is_err());
    }

    #[test]
    fn parameter_validation() {
        assert!(Univariate::normal(0.0, 0.0).is_err());
        assert!(Univariate::uniform(1.0, 1.0).is_err());
        assert!(Univariate::triangular(0.0, 2.0, 1.0).is_err());
        assert!(Univariate::beta(2.0, 2.0, 0.0, 1.0).is_err());
        assert!(from_family("Weibull", &[1.0]).unwrap_err().to_string().contains("Normal"));
    }
}
