//! Iso-probabilistic maps between the physical space and the standard normal space.
//!
//! Every supported copula is a normal copula with a block-diagonal score correlation,
//! so both transformations are exact:
//!
//! * Nataf: `v_i = Φ^{-1}(F_i(x_i))`, `u = L^{-1} v` with `L Lᵀ = R`;
//! * Rosenblatt: `u_i = Φ^{-1}(F_{i|1..i-1}(x_i))`, conditioning in margin order.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::joint::JointDistribution;
use crate::model::Model;
use crate::numeric::{norm_cdf, norm_pdf, norm_quantile};
use crate::sample::Sample;

/// Probabilities are clipped to `[CLIP, 1 - CLIP]` before `Φ^{-1}` or `F^{-1}`.
pub const CLIP: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformKind {
    Nataf,
    Rosenblatt,
}

#[derive(Debug, Clone)]
pub struct IsoTransform {
    joint: JointDistribution,
    kind: TransformKind,
    cholesky: DMatrix<f64>,
    /// Rosenblatt conditioning: `v_i | v_{<i} ~ N(Σ_k b_ik v_k, s_i^2)`.
    regression: Vec<(Vec<f64>, f64)>,
}

/// Image of a point, with a flag set when a probability had to be clipped.
#[derive(Debug, Clone, PartialEq)]
pub struct Mapped {
    pub point: Vec<f64>,
    pub clipped: bool,
}

fn clip(p: f64) -> (f64, bool) {
    let c = p.clamp(CLIP, 1.0 - CLIP);
    (c, c != p)
}

impl IsoTransform {
    /// Nataf for dependent inputs, Rosenblatt for independent ones.
    pub fn new(joint: JointDistribution) -> Result<Self> {
        let kind = if joint.copula().is_independent() {
            TransformKind::Rosenblatt
        } else {
            TransformKind::Nataf
        };
        IsoTransform::with_kind(joint, kind)
    }

    pub fn with_kind(joint: JointDistribution, kind: TransformKind) -> Result<Self> {
        let r = joint.copula().normal_correlation();
        let d = r.nrows();
        let cholesky = r
            .clone()
            .cholesky()
            .ok_or_else(|| Error::InvalidParameter("score correlation is not positive definite".into()))?
            .l();
        let mut regression = Vec::with_capacity(d);
        for i in 0..d {
            if i == 0 {
                regression.push((Vec::new(), 1.0));
                continue;
            }
            let r11 = r.view((0, 0), (i, i)).into_owned();
            let r12 = DVector::from_iterator(i, (0..i).map(|k| r[(k, i)]));
            let b = r11
                .cholesky()
                .expect("principal minor of a positive definite matrix")
                .solve(&r12);
            let var = 1.0 - b.dot(&r12);
            regression.push((b.as_slice().to_vec(), var.max(0.0).sqrt()));
        }
        Ok(IsoTransform {
            joint,
            kind,
            cholesky,
            regression,
        })
    }

    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    pub fn joint(&self) -> &JointDistribution {
        &self.joint
    }

    pub fn dim(&self) -> usize {
        self.joint.dim()
    }

    /// Lower-triangular factor of the score correlation.
    pub fn cholesky(&self) -> &DMatrix<f64> {
        &self.cholesky
    }

    fn check(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: p.len(),
            });
        }
        Ok(())
    }

    /// Gaussian scores `v_i = Φ^{-1}(F_i(x_i))`.
    fn scores(&self, x: &[f64]) -> Result<(Vec<f64>, bool)> {
        self.check(x)?;
        let mut clipped = false;
        let mut v = Vec::with_capacity(x.len());
        for (i, (&xi, m)) in x.iter().zip(self.joint.margins()).enumerate() {
            let (lo, hi) = m.support();
            if !(xi >= lo && xi <= hi) {
                return Err(Error::InvalidParameter(format!(
                    "component {i} = {xi} lies outside the support [{lo}, {hi}]"
                )));
            }
            // The lower tail is taken from the cdf, the upper from the survival function.
            let p = m.cdf(xi);
            let z = if p <= 0.5 {
                let (p, c) = clip(p);
                clipped |= c;
                norm_quantile(p)
            } else {
                let (q, c) = clip(m.sf(xi));
                clipped |= c;
                -norm_quantile(q)
            };
            v.push(z);
        }
        Ok((v, clipped))
    }

    pub fn to_standard_flagged(&self, x: &[f64]) -> Result<Mapped> {
        let (v, clipped) = self.scores(x)?;
        let point = match self.kind {
            TransformKind::Nataf => {
                let v = DVector::from_vec(v);
                self.cholesky
                    .solve_lower_triangular(&v)
                    .expect("non-singular factor")
                    .as_slice()
                    .to_vec()
            }
            TransformKind::Rosenblatt => self
                .regression
                .iter()
                .enumerate()
                .map(|(i, (b, s))| {
                    let m: f64 = b.iter().zip(&v).map(|(bk, vk)| bk * vk).sum();
                    (v[i] - m) / s
                })
                .collect(),
        };
        Ok(Mapped { point, clipped })
    }

    pub fn to_standard(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.to_standard_flagged(x)?.point)
    }

    fn standard_scores(&self, u: &[f64]) -> Vec<f64> {
        match self.kind {
            TransformKind::Nataf => (&self.cholesky * DVector::from_column_slice(u)).as_slice().to_vec(),
            TransformKind::Rosenblatt => {
                let mut v = Vec::with_capacity(u.len());
                for (i, (b, s)) in self.regression.iter().enumerate() {
                    let m: f64 = b.iter().zip(&v).map(|(bk, vk)| bk * vk).sum();
                    v.push(m + s * u[i]);
                }
                v
            }
        }
    }

    fn margin_quantile(&self, i: usize, v: f64) -> (f64, bool) {
        let (p, c) = clip(norm_cdf(v));
        (self.joint.margin(i).quantile(p), c)
    }

    pub fn from_standard_flagged(&self, u: &[f64]) -> Result<Mapped> {
        self.check(u)?;
        let v = self.standard_scores(u);
        let mut clipped = false;
        let point = v
            .iter()
            .enumerate()
            .map(|(i, &vi)| {
                let (x, c) = self.margin_quantile(i, vi);
                clipped |= c;
                x
            })
            .collect();
        Ok(Mapped { point, clipped })
    }

    pub fn from_standard(&self, u: &[f64]) -> Result<Vec<f64>> {
        Ok(self.from_standard_flagged(u)?.point)
    }

    /// Jacobian `dx/du` of the inverse map: `diag(φ(v_i) / f_i(x_i)) L`.
    pub fn inverse_jacobian(&self, u: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        self.check(u)?;
        let v = self.standard_scores(u);
        let d = self.dim();
        let mut x = Vec::with_capacity(d);
        let mut scale = Vec::with_capacity(d);
        for (i, &vi) in v.iter().enumerate() {
            let (xi, _) = self.margin_quantile(i, vi);
            let f = self.joint.margin(i).pdf(xi);
            scale.push(if f > 0.0 { norm_pdf(vi) / f } else { 0.0 });
            x.push(xi);
        }
        let mut j = self.cholesky.clone();
        for i in 0..d {
            for k in 0..d {
                j[(i, k)] *= scale[i];
            }
        }
        Ok((x, j))
    }
}

/// Direction of the event `G(X) > s` or `G(X) < s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparison {
    #[serde(rename = ">")]
    Greater,
    #[serde(rename = "<")]
    Less,
}

/// Failure event `{G_k(X) op s}` on one model output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    #[serde(default)]
    pub output: usize,
    pub comparison: Comparison,
    pub threshold: f64,
}

impl Event {
    pub fn greater(threshold: f64) -> Event {
        Event {
            output: 0,
            comparison: Comparison::Greater,
            threshold,
        }
    }

    /// Signed margin, positive inside the event.
    pub fn margin(&self, y: f64) -> f64 {
        match self.comparison {
            Comparison::Greater => y - self.threshold,
            Comparison::Less => self.threshold - y,
        }
    }

    pub fn occurs(&self, y: f64) -> bool {
        self.margin(y) > 0.0
    }
}

/// Standard-space limit state `g_U(u) = ±(G(T^{-1}(u)) - s)`, positive in the event.
#[derive(Debug, Clone)]
pub struct StandardEvent {
    model: Model,
    transform: IsoTransform,
    event: Event,
}

impl StandardEvent {
    pub fn new(model: Model, transform: IsoTransform, event: Event) -> Result<Self> {
        if model.input_dim() != transform.dim() {
            return Err(Error::Dimension {
                expected: transform.dim(),
                found: model.input_dim(),
            });
        }
        if event.output >= model.output_dim() {
            return Err(Error::InvalidParameter(format!(
                "event output {} but the model has {} outputs",
                event.output,
                model.output_dim()
            )));
        }
        Ok(StandardEvent {
            model,
            transform,
            event,
        })
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn transform(&self) -> &IsoTransform {
        &self.transform
    }

    pub fn event(&self) -> &Event {
        &self.event
    }

    pub fn dim(&self) -> usize {
        self.transform.dim()
    }

    /// Physical-model evaluations so far.
    pub fn evaluations(&self) -> u64 {
        self.model.evaluations()
    }

    pub fn value(&self, u: &[f64]) -> Result<f64> {
        let x = self.transform.from_standard(u)?;
        self.physical(&x)
    }

    /// Margins at a batch of standard-space points, evaluated through the model's
    /// batch contract.
    pub fn values(&self, u: &Sample) -> Result<Vec<f64>> {
        let mut x = Sample::with_labels(self.model.input_names().to_vec());
        for row in u.rows() {
            x.push(&self.transform.from_standard(row)?)?;
        }
        self.physical_values(&x)
    }

    /// Margins at a batch of physical points.
    pub fn physical_values(&self, x: &Sample) -> Result<Vec<f64>> {
        let y = self.model.evaluate(x)?;
        Ok(y.column(self.event.output).into_iter().map(|v| self.event.margin(v)).collect())
    }

    /// Margin evaluated at a physical point.
    pub fn physical(&self, x: &[f64]) -> Result<f64> {
        let y = self.model.call(x)?[self.event.output];
        Ok(self.event.margin(y))
    }

    /// Value and gradient by the chain rule through the inverse transform.
    pub fn value_gradient(&self, u: &[f64]) -> Result<(f64, Vec<f64>)> {
        let (x, jac) = self.transform.inverse_jacobian(u)?;
        let value = self.physical(&x)?;
        let gx = self.model.gradient(&x)?;
        let sign = match self.event.comparison {
            Comparison::Greater => 1.0,
            Comparison::Less => -1.0,
        };
        let row = gx.row(self.event.output).transpose() * sign;
        let g = jac.transpose() * row;
        Ok((value, g.as_slice().to_vec()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::Univariate;
    use crate::joint::Copula;

    #[test]
    fn standard_normal_margins_give_identity() {
        let j = JointDistribution::independent(vec![Univariate::standard_normal(); 3]).unwrap();
        let t = IsoTransform::new(j).unwrap();
        let x = [0.3, -1.2, 2.5];
        let u = t.to_standard(&x).unwrap();
        for (a, b) in u.iter().zip(&x) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn nataf_and_rosenblatt_agree_on_normal_copula() {
        let margins = vec![
            Univariate::gumbel(1.8e-3, 1014.0).unwrap(),
            Univariate::triangular(47.6, 50.5, 52.4).unwrap(),
            Univariate::triangular(52.5, 54.9, 57.7).unwrap(),
        ];
        let c = Copula::composed(vec![Copula::Independent(1), Copula::normal2(0.7).unwrap()]).unwrap();
        let j = JointDistribution::new(margins, c).unwrap();
        let n = IsoTransform::with_kind(j.clone(), TransformKind::Nataf).unwrap();
        let r = IsoTransform::with_kind(j, TransformKind::Rosenblatt).unwrap();
        let x = [1500.0, 50.0, 55.0];
        let (a, b) = (n.to_standard(&x).unwrap(), r.to_standard(&x).unwrap());
        for (p, q) in a.iter().zip(&b) {
            assert!((p - q).abs() < 1e-12);
        }
        let back = n.from_standard(&a).unwrap();
        for (p, q) in back.iter().zip(&x) {
            assert!((p - q).abs() < 1e-8 * q.abs());
        }
    }

    #[test]
    fn outside_support_and_clipping() {
        let j = JointDistribution::independent(vec![Univariate::uniform(0.0, 1.0).unwrap()]).unwrap();
        let t = IsoTransform::new(j).unwrap();
        assert!(t.to_standard(&[1.5]).is_err());
        let m = t.to_standard_flagged(&[0.0]).unwrap();
        assert!(m.clipped && m.point[0].is_finite());
    }

    #[test]
    fn linear_gaussian_limit_state_is_affine() {
        let j = JointDistribution::independent(vec![
            Univariate::normal(1.0, 2.0).unwrap(),
            Univariate::normal(-1.0, 0.5).unwrap(),
        ])
        .unwrap();
        let m = Model::from_expressions(&["a", "b"], &["y"], &["3*a - 2*b"]).unwrap();
        let e = StandardEvent::new(m, IsoTransform::new(j).unwrap(), Event::greater(4.0)).unwrap();
        // g(u) = 3(1 + 2 u1) - 2(-1 + 0.5 u2) - 4 = 1 + 6 u1 - u2.
        for u in [[0.0, 0.0], [1.0, -2.0], [0.3, 0.7]] {
            let (v, g) = e.value_gradient(&u).unwrap();
            assert!((v - (1.0 + 6.0 * u[0] - u[1])).abs() < 1e-12);
            assert!((g[0] - 6.0).abs() < 1e-9 && (g[1] + 1.0).abs() < 1e-9);
        }
    }
}
