//! Joint distributions assembled from margins and a copula, conditional
//! constructions and sampling-based sums of random variables.

mod compound;
mod conditional;
mod copula;
mod spec;

pub use compound::{LinearCombination, RandomSum};
pub use conditional::{ConditionalVector, ParameterLaw};
pub use copula::{fit_normal_copula, Copula, NormalCopula};
pub use spec::{JointSpec, MarginSpec};

use nalgebra::DMatrix;

use crate::dist::Univariate;
use crate::error::{Error, Result};
use crate::numeric::{integrate, norm_cdf, norm_pdf};
use crate::rng::RngStream;
use crate::sample::Sample;

#[derive(Debug, Clone)]
pub struct JointDistribution {
    margins: Vec<Univariate>,
    copula: Copula,
    labels: Vec<String>,
}

impl JointDistribution {
    pub fn new(margins: Vec<Univariate>, copula: Copula) -> Result<Self> {
        if margins.len() != copula.dim() {
            return Err(Error::Dimension {
                expected: copula.dim(),
                found: margins.len(),
            });
        }
        let labels = (0..margins.len()).map(|i| format!("X{i}")).collect();
        Ok(JointDistribution {
            margins,
            copula,
            labels,
        })
    }

    pub fn independent(margins: Vec<Univariate>) -> Result<Self> {
        let c = Copula::independent(margins.len())?;
        JointDistribution::new(margins, c)
    }

    pub fn with_labels<S: Into<String>>(mut self, labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: labels.len(),
            });
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.margins.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn margins(&self) -> &[Univariate] {
        &self.margins
    }

    pub fn margin(&self, i: usize) -> &Univariate {
        &self.margins[i]
    }

    pub fn copula(&self) -> &Copula {
        &self.copula
    }

    /// The stored copula (Sklar decomposition).
    pub fn extract_copula(&self) -> Copula {
        self.copula.clone()
    }

    pub fn draw_into(&self, rng: &mut RngStream, out: &mut [f64]) {
        self.copula.draw_into(rng, out);
        for (x, m) in out.iter_mut().zip(&self.margins) {
            *x = m.quantile(*x);
        }
    }

    pub fn sample(&self, n: usize, rng: &mut RngStream) -> Sample {
        let d = self.dim();
        let mut data = vec![0.0; n * d];
        for row in data.chunks_mut(d) {
            self.draw_into(rng, row);
        }
        Sample::from_flat(d, data)
            .and_then(|s| s.set_labels(self.labels.clone()))
            .expect("consistent dimensions")
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(())
    }

    pub fn log_pdf(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        let mut acc = 0.0;
        for (m, &xi) in self.margins.iter().zip(x) {
            acc += m.log_pdf(xi);
        }
        if acc == f64::NEG_INFINITY || self.copula.is_independent() {
            return Ok(acc);
        }
        let u: Vec<f64> = self.margins.iter().zip(x).map(|(m, &xi)| m.cdf(xi)).collect();
        Ok(acc + self.copula.log_pdf(&u))
    }

    pub fn pdf(&self, x: &[f64]) -> Result<f64> {
        Ok(self.log_pdf(x)?.exp())
    }

    pub fn cdf(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        let u: Vec<f64> = self.margins.iter().zip(x).map(|(m, &xi)| m.cdf(xi)).collect();
        Ok(self.copula.cdf(&u))
    }

    pub fn mean(&self) -> Vec<f64> {
        self.margins.iter().map(Univariate::mean).collect()
    }

    pub fn std(&self) -> Vec<f64> {
        self.margins.iter().map(Univariate::std).collect()
    }

    /// Covariance matrix. Off-diagonal terms for correlated scores are computed as
    /// `E[(F_i^{-1}(Φ(Z_i)) - μ_i)(F_j^{-1}(Φ(Z_j)) - μ_j)]` by nested quadrature.
    pub fn covariance(&self) -> DMatrix<f64> {
        let d = self.dim();
        let r = self.copula.normal_correlation();
        let mean = self.mean();
        let mut cov = DMatrix::zeros(d, d);
        for i in 0..d {
            cov[(i, i)] = self.margins[i].variance();
            for j in 0..i {
                let rho = r[(i, j)];
                if rho == 0.0 {
                    continue;
                }
                let c = score_covariance(&self.margins[i], &self.margins[j], mean[i], mean[j], rho);
                cov[(i, j)] = c;
                cov[(j, i)] = c;
            }
        }
        cov
    }

    /// Sub-joint on the given components. Only valid when the selection does not split a
    /// dependent block, which is checked.
    pub fn marginal(&self, indices: &[usize]) -> Result<JointDistribution> {
        let r = self.copula.normal_correlation();
        for &i in indices {
            for j in 0..self.dim() {
                if r[(i, j)] != 0.0 && i != j && !indices.contains(&j) {
                    return Err(Error::Unsupported(
                        "marginal that splits a dependent copula block".into(),
                    ));
                }
            }
        }
        let margins = indices.iter().map(|&i| self.margins[i].clone()).collect();
        let sub = DMatrix::from_fn(indices.len(), indices.len(), |a, b| r[(indices[a], indices[b])]);
        let copula = if sub == DMatrix::identity(indices.len(), indices.len()) {
            Copula::independent(indices.len())?
        } else {
            Copula::normal(sub)?
        };
        JointDistribution::new(margins, copula)?
            .with_labels(indices.iter().map(|&i| self.labels[i].clone()))
    }

    /// Lower and upper support bounds per component.
    pub fn support(&self) -> (Vec<f64>, Vec<f64>) {
        self.margins.iter().map(Univariate::support).unzip()
    }
}

fn score_covariance(a: &Univariate, b: &Univariate, ma: f64, mb: f64, rho: f64) -> f64 {
    let s = (1.0 - rho * rho).sqrt();
    let outer = |z: f64| {
        let ga = a.quantile(norm_cdf(z).clamp(1e-300, 1.0 - 1e-16)) - ma;
        if !ga.is_finite() {
            return 0.0;
        }
        let inner = integrate(
            |w| {
                let gb = b.quantile(norm_cdf(rho * z + s * w).clamp(1e-300, 1.0 - 1e-16)) - mb;
                if gb.is_finite() {
                    gb * norm_pdf(w)
                } else {
                    0.0
                }
            },
            -9.0,
            9.0,
            1e-10,
        )
        .value;
        ga * inner * norm_pdf(z)
    };
    integrate(outer, -9.0, 9.0, 1e-9).value
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn independent_pdf_is_product() {
        let m = vec![Univariate::normal(1.0, 2.0).unwrap(), Univariate::uniform(0.0, 3.0).unwrap()];
        let j = JointDistribution::independent(m.clone()).unwrap();
        let x = [0.3, 1.2];
        assert!((j.pdf(&x).unwrap() - m[0].pdf(0.3) * m[1].pdf(1.2)).abs() < 1e-15);
        assert!((j.cdf(&[f64::INFINITY, 3.0]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_covariance_equals_rho() {
        let m = vec![Univariate::normal(0.0, 2.0).unwrap(), Univariate::normal(5.0, 3.0).unwrap()];
        let j = JointDistribution::new(m, Copula::normal2(0.7).unwrap()).unwrap();
        let c = j.covariance();
        assert!((c[(0, 1)] - 0.7 * 6.0).abs() < 1e-7, "{}", c[(0, 1)]);
    }

    #[test]
    fn uniform_margins_cdf() {
        let m = vec![Univariate::uniform(0.0, 1.0).unwrap(); 2];
        let j = JointDistribution::new(m, Copula::normal2(0.7).unwrap()).unwrap();
        let want = 0.25 + 0.7f64.asin() / (2.0 * std::f64::consts::PI);
        assert!((j.cdf(&[0.5, 0.5]).unwrap() - want).abs() < 1e-10);
    }
}
