use crate::dist::Univariate;
use crate::error::{invalid, Error, Result};
use crate::rng::RngStream;

/// `X = Σ_{i=1}^N X_i` with `N ~ Poisson(λ)` and i.i.d. `X_i`.
#[derive(Debug, Clone)]
pub struct RandomSum {
    pub component: Univariate,
    pub lambda: f64,
}

/// Largest Poisson rate drawn by a single inversion; larger rates are split.
const POISSON_CHUNK: f64 = 200.0;

pub fn poisson(lambda: f64, rng: &mut RngStream) -> u64 {
    let mut remaining = lambda;
    let mut total = 0;
    while remaining > 0.0 {
        let l = remaining.min(POISSON_CHUNK);
        remaining -= l;
        let u = rng.uniform();
        let mut p = (-l).exp();
        let mut cdf = p;
        let mut k = 0u64;
        while u > cdf && p > 0.0 {
            k += 1;
            p *= l / k as f64;
            cdf += p;
        }
        total += k;
    }
    total
}

impl RandomSum {
    pub fn new(component: Univariate, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return invalid("Poisson rate must be positive");
        }
        Ok(RandomSum { component, lambda })
    }

    pub fn draw(&self, rng: &mut RngStream) -> f64 {
        let n = poisson(self.lambda, rng);
        (0..n).map(|_| self.component.draw(rng)).sum()
    }

    pub fn sample(&self, n: usize, rng: &mut RngStream) -> Vec<f64> {
        (0..n).map(|_| self.draw(rng)).collect()
    }

    pub fn mean(&self) -> f64 {
        self.lambda * self.component.mean()
    }

    pub fn variance(&self) -> f64 {
        let m = self.component.mean();
        self.lambda * (self.component.variance() + m * m)
    }
}

/// `X = a_0 + Σ a_i X_i` with independent `X_i`.
#[derive(Debug, Clone)]
pub struct LinearCombination {
    pub constant: f64,
    pub coefficients: Vec<f64>,
    pub components: Vec<Univariate>,
}

impl LinearCombination {
    pub fn new(constant: f64, coefficients: Vec<f64>, components: Vec<Univariate>) -> Result<Self> {
        if coefficients.len() != components.len() {
            return Err(Error::Dimension {
                expected: components.len(),
                found: coefficients.len(),
            });
        }
        if components.is_empty() {
            return invalid("linear combination needs at least one component");
        }
        Ok(LinearCombination {
            constant,
            coefficients,
            components,
        })
    }

    pub fn draw(&self, rng: &mut RngStream) -> f64 {
        self.constant
            + self
                .coefficients
                .iter()
                .zip(&self.components)
                .map(|(a, d)| a * d.draw(rng))
                .sum::<f64>()
    }

    pub fn sample(&self, n: usize, rng: &mut RngStream) -> Vec<f64> {
        (0..n).map(|_| self.draw(rng)).collect()
    }

    pub fn mean(&self) -> f64 {
        self.constant
            + self
                .coefficients
                .iter()
                .zip(&self.components)
                .map(|(a, d)| a * d.mean())
                .sum::<f64>()
    }

    pub fn variance(&self) -> f64 {
        self.coefficients
            .iter()
            .zip(&self.components)
            .map(|(a, d)| a * a * d.variance())
            .sum()
    }
}
