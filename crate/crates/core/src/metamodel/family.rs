use serde::{Deserialize, Serialize};

use crate::dist::Univariate;
use crate::error::{invalid, Result};
use crate::numeric::gauss_rule;

/// Univariate orthonormal polynomial families and their probability measures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrthonormalFamily {
    /// Standard normal measure.
    Hermite,
    /// Uniform measure on `[-1, 1]`.
    Legendre,
    /// Measure proportional to `(1 - z)^alpha (1 + z)^beta` on `[-1, 1]`, that is
    /// `Beta(r = beta + 1, t = alpha + beta + 2, -1, 1)`.
    Jacobi { alpha: f64, beta: f64 },
    /// Measure `Gamma(k + 1, 1, 0)`.
    Laguerre { k: f64 },
}

impl OrthonormalFamily {
    pub fn jacobi(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > -1.0 && beta > -1.0) {
            return invalid("Jacobi parameters must exceed -1");
        }
        Ok(OrthonormalFamily::Jacobi { alpha, beta })
    }

    pub fn laguerre(k: f64) -> Result<Self> {
        if !(k > -1.0) {
            return invalid("Laguerre parameter must exceed -1");
        }
        Ok(OrthonormalFamily::Laguerre { k })
    }

    pub fn measure(&self) -> Univariate {
        match *self {
            OrthonormalFamily::Hermite => Univariate::standard_normal(),
            OrthonormalFamily::Legendre => Univariate::Uniform { a: -1.0, b: 1.0 },
            OrthonormalFamily::Jacobi { alpha, beta } => Univariate::Beta {
                r: beta + 1.0,
                t: alpha + beta + 2.0,
                a: -1.0,
                b: 1.0,
            },
            OrthonormalFamily::Laguerre { k } => Univariate::Gamma {
                k: k + 1.0,
                lambda: 1.0,
                gamma: 0.0,
            },
        }
    }

    /// Monic recurrence `p_{n+1} = (z - a_n) p_n - b_n p_{n-1}` of the measure
    /// (a probability, so `b_0 = 1`).
    pub fn recurrence(&self, n: usize) -> (f64, f64) {
        let nf = n as f64;
        match *self {
            OrthonormalFamily::Hermite => (0.0, if n == 0 { 1.0 } else { nf }),
            OrthonormalFamily::Legendre => (0.0, if n == 0 { 1.0 } else { nf * nf / (4.0 * nf * nf - 1.0) }),
            OrthonormalFamily::Laguerre { k } => (2.0 * nf + k + 1.0, if n == 0 { 1.0 } else { nf * (nf + k) }),
            OrthonormalFamily::Jacobi { alpha: a, beta: b } => {
                let s = a + b;
                let an = if n == 0 {
                    (b - a) / (s + 2.0)
                } else {
                    (b * b - a * a) / ((2.0 * nf + s) * (2.0 * nf + s + 2.0))
                };
                let bn = match n {
                    0 => 1.0,
                    1 => 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + s).powi(2) * (3.0 + s)),
                    _ => {
                        let t = 2.0 * nf + s;
                        4.0 * nf * (nf + a) * (nf + b) * (nf + s) / (t * t * (t + 1.0) * (t - 1.0))
                    }
                };
                (an, bn)
            }
        }
    }

    /// Values `ψ_0(z), ..., ψ_degree(z)` of the orthonormal polynomials.
    pub fn values(&self, z: f64, degree: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(degree + 1);
        out.push(1.0);
        if degree == 0 {
            return out;
        }
        let (a0, _) = self.recurrence(0);
        let (_, b1) = self.recurrence(1);
        out.push((z - a0) / b1.sqrt());
        for n in 1..degree {
            let (an, bn) = self.recurrence(n);
            let (_, bn1) = self.recurrence(n + 1);
            let next = ((z - an) * out[n] - bn.sqrt() * out[n - 1]) / bn1.sqrt();
            out.push(next);
        }
        out
    }

    /// Gauss rule with `n` nodes for the measure; weights sum to one.
    pub fn gauss(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        let (alpha, beta): (Vec<f64>, Vec<f64>) = (0..n).map(|k| self.recurrence(k)).unzip();
        gauss_rule(&alpha, &beta)
    }
}
