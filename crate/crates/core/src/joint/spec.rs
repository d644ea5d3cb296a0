use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dist::{from_family, Univariate, FAMILIES};
use crate::error::{Error, Result};

use super::{Copula, JointDistribution};

/// Plain-data description of a parametric margin, optionally truncated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarginSpec {
    pub family: String,
    pub parameters: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
}

impl MarginSpec {
    pub fn build(&self) -> Result<Univariate> {
        let base = from_family(&self.family, &self.parameters)?;
        if self.lower.is_some() || self.upper.is_some() {
            base.truncate(self.lower, self.upper)
        } else {
            Ok(base)
        }
    }

    pub fn describe(margin: &Univariate) -> Result<MarginSpec> {
        let (base, lower, upper) = match margin {
            Univariate::Truncated(t) => (
                &t.base,
                t.lower.is_finite().then_some(t.lower),
                t.upper.is_finite().then_some(t.upper),
            ),
            m => (m, None, None),
        };
        let (family, params) = base.describe();
        if !FAMILIES.contains(&family.as_str()) {
            return Err(Error::Unsupported(format!("margin {family} has no parametric description")));
        }
        Ok(MarginSpec {
            family,
            parameters: params.into_iter().map(|(_, v)| v).collect(),
            lower,
            upper,
        })
    }
}

/// Plain-data description of a joint distribution with a normal copula.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointSpec {
    pub labels: Vec<String>,
    pub margins: Vec<MarginSpec>,
    /// Correlation of the normal copula; absent for independent inputs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlation: Option<Vec<Vec<f64>>>,
}

impl JointSpec {
    pub fn build(&self) -> Result<JointDistribution> {
        let d = self.margins.len();
        let margins = self.margins.iter().map(MarginSpec::build).collect::<Result<Vec<_>>>()?;
        let copula = match &self.correlation {
            None => Copula::independent(d)?,
            Some(rows) => {
                if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                    return Err(Error::Dimension {
                        expected: d,
                        found: rows.len(),
                    });
                }
                Copula::normal(DMatrix::from_fn(d, d, |i, j| rows[i][j]))?
            }
        };
        JointDistribution::new(margins, copula)?.with_labels(self.labels.clone())
    }

    pub fn describe(joint: &JointDistribution) -> Result<JointSpec> {
        let margins = joint.margins().iter().map(MarginSpec::describe).collect::<Result<Vec<_>>>()?;
        let copula = joint.copula();
        let correlation = if copula.is_independent() {
            None
        } else {
            let r = copula.normal_correlation();
            Some((0..r.nrows()).map(|i| r.row(i).iter().copied().collect()).collect())
        };
        Ok(JointSpec {
            labels: joint.labels().to_vec(),
            margins,
            correlation,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_through_json() {
        let margins = vec![
            Univariate::gumbel(1.8e-3, 1014.0).unwrap().truncate(Some(0.0), None).unwrap(),
            Univariate::triangular(47.6, 50.5, 52.4).unwrap(),
        ];
        let j = JointDistribution::new(margins, Copula::normal2(0.3).unwrap()).unwrap();
        let spec = JointSpec::describe(&j).unwrap();
        let text = serde_json::to_string(&spec).unwrap();
        let back: JointSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
        let j2 = back.build().unwrap();
        for x in [[1000.0, 50.0], [3000.0, 48.0]] {
            assert_eq!(j.pdf(&x).unwrap(), j2.pdf(&x).unwrap());
        }
        let mix = Univariate::mixture(vec![Univariate::standard_normal(); 2], vec![1.0, 1.0]).unwrap();
        assert!(MarginSpec::describe(&mix).is_err());
    }
}
