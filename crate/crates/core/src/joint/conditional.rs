use crate::dist::{from_family, Univariate};
use crate::error::{invalid, Error, Result};
use crate::model::Model;
use crate::numeric::integrate;
use crate::rng::RngStream;

use super::JointDistribution;

const PIECES: usize = 16;

/// Law of the parameters of a conditioned family.
#[derive(Debug, Clone)]
pub enum ParameterLaw {
    /// The parameters themselves are random.
    Direct(JointDistribution),
    /// Parameters `θ = g(Y)` for a random vector `Y`.
    Linked { law: JointDistribution, link: Model },
}

impl ParameterLaw {
    fn law(&self) -> &JointDistribution {
        match self {
            ParameterLaw::Direct(j) | ParameterLaw::Linked { law: j, .. } => j,
        }
    }
}

/// `X | Θ` distributed in a parametric family whose parameters are random.
#[derive(Debug, Clone)]
pub struct ConditionalVector {
    family: String,
    parameters: ParameterLaw,
}

impl ConditionalVector {
    pub fn new(family: &str, parameters: ParameterLaw) -> Result<Self> {
        if !crate::dist::FAMILIES.contains(&family) {
            return invalid(format!(
                "unknown family '{family}'; supported: {}",
                crate::dist::FAMILIES.join(", ")
            ));
        }
        if let ParameterLaw::Linked { law, link } = &parameters {
            if link.input_dim() != law.dim() {
                return Err(Error::Dimension {
                    expected: law.dim(),
                    found: link.input_dim(),
                });
            }
        }
        Ok(ConditionalVector {
            family: family.to_owned(),
            parameters,
        })
    }

    fn theta(&self, y: &[f64]) -> Result<Vec<f64>> {
        match &self.parameters {
            ParameterLaw::Direct(_) => Ok(y.to_vec()),
            ParameterLaw::Linked { link, .. } => link.call(y),
        }
    }

    fn conditional_law(&self, y: &[f64]) -> Result<Univariate> {
        let theta = self.theta(y)?;
        from_family(&self.family, &theta).map_err(|e| {
            Error::InvalidParameter(format!("parameter draw {theta:?} is invalid for {}: {e}", self.family))
        })
    }

    /// Draws `θ` (or `y` then `θ = g(y)`) and one `X` from the resulting family, per row.
    pub fn sample(&self, n: usize, rng: &mut RngStream) -> Result<Vec<f64>> {
        let law = self.parameters.law();
        let mut y = vec![0.0; law.dim()];
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            law.draw_into(rng, &mut y);
            out.push(self.conditional_law(&y)?.draw(rng));
        }
        Ok(out)
    }

    /// Marginal density `∫ f_{X|θ=g(y)}(x) f_Y(y) dy` by iterated adaptive quadrature
    /// over the non-degenerate components of `Y`.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        let law = self.parameters.law();
        let fixed: Vec<Option<f64>> = law
            .margins()
            .iter()
            .map(|m| match m {
                Univariate::Dirac { value } => Some(*value),
                _ => None,
            })
            .collect();
        let free: Vec<usize> = (0..law.dim()).filter(|&i| fixed[i].is_none()).collect();
        if free.len() < law.dim() && !free.is_empty() && !law.copula().is_independent() {
            return Err(Error::Unsupported(
                "degenerate parameter components need an independent copula".into(),
            ));
        }
        let mut y: Vec<f64> = fixed.iter().map(|v| v.unwrap_or(0.0)).collect();
        let mut failure = None;
        let value = self.integrate_level(x, law, &free, 0, &mut y, &mut failure);
        match failure {
            Some(e) => Err(e),
            None => Ok(value),
        }
    }

    fn integrate_level(
        &self,
        x: f64,
        law: &JointDistribution,
        free: &[usize],
        level: usize,
        y: &mut Vec<f64>,
        failure: &mut Option<Error>,
    ) -> f64 {
        if level == free.len() {
            let density = if free.len() == law.dim() {
                law.pdf(y).unwrap_or(0.0)
            } else {
                free.iter().map(|&i| law.margin(i).pdf(y[i])).product()
            };
            if density == 0.0 {
                return 0.0;
            }
            return match self.conditional_law(y) {
                Ok(d) => d.pdf(x) * density,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            };
        }
        let i = free[level];
        let m = law.margin(i);
        let (lo, hi) = m.support();
        let lo = if lo.is_finite() { lo } else { m.quantile(1e-13) };
        let hi = if hi.is_finite() { hi } else { m.quantile(1.0 - 1e-13) };
        let mut state = y.clone();
        // The integrand jumps where x leaves the conditional support; starting from a
        // partition keeps thin contributing regions from falling between nodes.
        let width = (hi - lo) / PIECES as f64;
        (0..PIECES)
            .map(|k| {
                let a = lo + k as f64 * width;
                let b = if k + 1 == PIECES { hi } else { a + width };
                integrate(
                    |t| {
                        state[i] = t;
                        self.integrate_level(x, law, free, level + 1, &mut state, failure)
                    },
                    a,
                    b,
                    1e-8 / PIECES as f64,
                )
                .value
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_parameters_give_the_family() {
        let law = JointDistribution::independent(vec![
            Univariate::dirac(0.0).unwrap(),
            Univariate::dirac(1.0).unwrap(),
        ])
        .unwrap();
        let c = ConditionalVector::new("Normal", ParameterLaw::Direct(law)).unwrap();
        for x in [-1.0, 0.0, 2.0] {
            assert!((c.pdf(x).unwrap() - Univariate::standard_normal().pdf(x)).abs() < 1e-15);
        }
    }

    #[test]
    fn linked_uniform_normalizes() {
        let law = JointDistribution::independent(vec![Univariate::uniform(-1.0, 1.0).unwrap()]).unwrap();
        let link = Model::from_expressions(&["y"], &["a", "b"], &["y", "1 + y^2"]).unwrap();
        let c = ConditionalVector::new("Uniform", ParameterLaw::Linked { law, link }).unwrap();
        // Reference values from an independent quadrature of the defining integral.
        for (x, want) in [(0.5, 0.604_599_788_078_072_6), (1.5, 0.223_779_051_377_375_55), (-0.5, 0.109_769_068_271_922_6)] {
            assert!((c.pdf(x).unwrap() - want).abs() < 1e-8, "{x} {}", c.pdf(x).unwrap());
        }
        let total = integrate(|x| c.pdf(x).unwrap(), -1.0, 2.0, 1e-8).value;
        assert!((total - 1.0).abs() < 1e-6, "{total}");
        let mut rng = RngStream::new(1);
        assert!(c.sample(10_000, &mut rng).unwrap().iter().all(|&x| x > -1.0 && x < 2.0));
    }

    #[test]
    fn invalid_draw_reports_parameters() {
        let law = JointDistribution::independent(vec![
            Univariate::uniform(-1.0, 1.0).unwrap(),
            Univariate::dirac(-1.0).unwrap(),
        ])
        .unwrap();
        let c = ConditionalVector::new("Normal", ParameterLaw::Direct(law)).unwrap();
        let err = c.sample(1, &mut RngStream::new(0)).unwrap_err().to_string();
        assert!(err.contains("-1"), "{err}");
    }
}
