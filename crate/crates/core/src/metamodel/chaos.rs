use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::design::Design;
use crate::dist::Univariate;
use crate::error::{invalid, Error, Result};
use crate::joint::{JointDistribution, JointSpec};
use crate::model::Model;
use crate::numeric::norm_quantile;
use crate::rng::RngStream;
use crate::sample::Sample;
use crate::transform::IsoTransform;

use super::enumeration::{cumulated_cardinal, enumerate_multi_indices, Enumeration};
use super::family::OrthonormalFamily;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Truncation {
    /// First `count` indices of the enumeration.
    Fixed { count: usize },
    /// Every index of total degree at most `degree` (linear enumeration count).
    Degree { degree: usize },
    /// Fit the first `max_considered` indices, then keep at most `keep` whose
    /// coefficients reach `significance` times the largest non-constant one.
    Cleaning {
        max_considered: usize,
        keep: usize,
        #[serde(default = "default_significance")]
        significance: f64,
    },
}

fn default_significance() -> f64 {
    1e-4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Projection {
    /// Least squares on the design mapped to the inputs.
    LeastSquares { design: Design },
    /// Equal-weight quadrature `α_k = (1/N) Σ g(x_i) Ψ_k(z_i)` over the design.
    Integration { design: Design },
    /// Tensor Gauss rule of the measure with `nodes` points per dimension.
    GaussProduct { nodes: usize },
}

/// How inputs are mapped to the measure of the basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChaosMeasure {
    /// Margin-matched families for independent inputs, Hermite after the
    /// iso-probabilistic transform otherwise.
    Auto,
    /// Hermite after the iso-probabilistic transform.
    Standard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaosSettings {
    pub enumeration: Enumeration,
    pub truncation: Truncation,
    pub projection: Projection,
    #[serde(default = "auto")]
    pub measure: ChaosMeasure,
}

fn auto() -> ChaosMeasure {
    ChaosMeasure::Auto
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChaosTransform {
    /// `z_i = (x_i - shift_i) / scale_i`.
    Affine { shift: Vec<f64>, scale: Vec<f64> },
    /// Iso-probabilistic transform of the described joint distribution.
    Standard { joint: JointSpec },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChaosExpansion {
    pub input_names: Vec<String>,
    pub output_names: Vec<String>,
    pub families: Vec<OrthonormalFamily>,
    pub indices: Vec<Vec<usize>>,
    /// `coefficients[o][k]` for output `o` and basis term `k`.
    pub coefficients: Vec<Vec<f64>>,
    pub transform: ChaosTransform,
    /// Root mean square residual on the fitting points, per output.
    pub residuals: Vec<f64>,
    /// Mean square residual over the output variance, per output.
    pub relative_errors: Vec<f64>,
    #[serde(skip)]
    iso: Option<Arc<IsoTransform>>,
}

/// Margin-matched family and affine map for the supported margins.
fn matched(margin: &Univariate) -> Result<(OrthonormalFamily, f64, f64)> {
    match *margin {
        Univariate::Normal { mu, sigma } => Ok((OrthonormalFamily::Hermite, mu, sigma)),
        Univariate::Uniform { a, b } => Ok((OrthonormalFamily::Legendre, 0.5 * (a + b), 0.5 * (b - a))),
        Univariate::Beta { r, t, a, b } => Ok((
            OrthonormalFamily::jacobi(t - r - 1.0, r - 1.0)?,
            0.5 * (a + b),
            0.5 * (b - a),
        )),
        Univariate::Gamma { k, lambda, gamma } => Ok((OrthonormalFamily::laguerre(k - 1.0)?, gamma, 1.0 / lambda)),
        Univariate::Exponential { lambda, gamma } => Ok((OrthonormalFamily::laguerre(0.0)?, gamma, 1.0 / lambda)),
        ref m => Err(Error::Unsupported(format!(
            "no orthonormal family matches the margin {m}; use the standard measure"
        ))),
    }
}

struct Setup {
    families: Vec<OrthonormalFamily>,
    transform: ChaosTransform,
    iso: Option<Arc<IsoTransform>>,
}

fn setup(joint: &JointDistribution, measure: ChaosMeasure) -> Result<Setup> {
    let d = joint.dim();
    if measure == ChaosMeasure::Auto && joint.copula().is_independent() {
        let mut families = Vec::with_capacity(d);
        let (mut shift, mut scale) = (Vec::with_capacity(d), Vec::with_capacity(d));
        for m in joint.margins() {
            let (f, s, c) = matched(m)?;
            families.push(f);
            shift.push(s);
            scale.push(c);
        }
        return Ok(Setup {
            families,
            transform: ChaosTransform::Affine { shift, scale },
            iso: None,
        });
    }
    let spec = JointSpec::describe(joint)?;
    Ok(Setup {
        families: vec![OrthonormalFamily::Hermite; d],
        transform: ChaosTransform::Standard { joint: spec },
        iso: Some(Arc::new(IsoTransform::new(joint.clone())?)),
    })
}

impl Setup {
    /// Input point and measure-space point from a unit-cube point.
    fn from_unit(&self, p: &[f64], joint: &JointDistribution) -> Result<(Vec<f64>, Vec<f64>)> {
        let clip = |v: f64| v.clamp(1e-15, 1.0 - 1e-15);
        match (&self.transform, &self.iso) {
            (ChaosTransform::Affine { shift, scale }, _) => {
                let x: Vec<f64> = p.iter().enumerate().map(|(i, &v)| joint.margin(i).quantile(clip(v))).collect();
                let z = x.iter().enumerate().map(|(i, v)| (v - shift[i]) / scale[i]).collect();
                Ok((x, z))
            }
            (ChaosTransform::Standard { .. }, Some(iso)) => {
                let u: Vec<f64> = p.iter().map(|&v| norm_quantile(clip(v))).collect();
                Ok((iso.from_standard(&u)?, u))
            }
            _ => Err(Error::Numerical("standard transform not prepared".into())),
        }
    }

    fn from_measure(&self, z: &[f64]) -> Result<Vec<f64>> {
        match (&self.transform, &self.iso) {
            (ChaosTransform::Affine { shift, scale }, _) => {
                Ok(z.iter().enumerate().map(|(i, v)| shift[i] + scale[i] * v).collect())
            }
            (ChaosTransform::Standard { .. }, Some(iso)) => iso.from_standard(z),
            _ => Err(Error::Numerical("standard transform not prepared".into())),
        }
    }
}

fn basis_row(families: &[OrthonormalFamily], indices: &[Vec<usize>], z: &[f64]) -> Vec<f64> {
    let max_deg: Vec<usize> = (0..families.len())
        .map(|i| indices.iter().map(|k| k[i]).max().unwrap_or(0))
        .collect();
    let values: Vec<Vec<f64>> = families
        .iter()
        .zip(z)
        .zip(&max_deg)
        .map(|((f, &zi), &deg)| f.values(zi, deg))
        .collect();
    indices
        .iter()
        .map(|k| k.iter().enumerate().map(|(i, &ki)| values[i][ki]).product())
        .collect()
}

fn design_matrix(families: &[OrthonormalFamily], indices: &[Vec<usize>], z: &[Vec<f64>]) -> DMatrix<f64> {
    let rows: Vec<Vec<f64>> = z.iter().map(|zi| basis_row(families, indices, zi)).collect();
    DMatrix::from_fn(z.len(), indices.len(), |i, k| rows[i][k])
}

/// Fitting points in measure space with their outputs and quadrature weights.
struct Experiment {
    z: Vec<Vec<f64>>,
    y: Vec<Vec<f64>>,
    weights: Option<Vec<f64>>,
}

fn least_squares(psi: &DMatrix<f64>, y: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let svd = psi.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 0.0) || smax / smin > 1e10 {
        return Err(Error::Numerical(format!(
            "ill-conditioned chaos design (condition number {:.3e})",
            smax / smin
        )));
    }
    let qr = psi.clone().qr();
    let (q, r) = (qr.q(), qr.r());
    let p = y[0].len();
    (0..p)
        .map(|o| {
            let b = DVector::from_iterator(y.len(), y.iter().map(|row| row[o]));
            r.solve_upper_triangular(&(q.transpose() * b))
                .map(|c| c.iter().copied().collect())
                .ok_or_else(|| Error::Numerical("singular chaos design".into()))
        })
        .collect()
}

fn project(families: &[OrthonormalFamily], indices: &[Vec<usize>], exp: &Experiment) -> Result<Vec<Vec<f64>>> {
    let psi = design_matrix(families, indices, &exp.z);
    match &exp.weights {
        None => least_squares(&psi, &exp.y),
        Some(w) => {
            let p = exp.y[0].len();
            Ok((0..p)
                .map(|o| {
                    (0..indices.len())
                        .map(|k| (0..exp.z.len()).map(|i| w[i] * exp.y[i][o] * psi[(i, k)]).sum())
                        .collect()
                })
                .collect())
        }
    }
}

fn gauss_product(families: &[OrthonormalFamily], nodes: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let rules: Vec<(Vec<f64>, Vec<f64>)> = families.iter().map(|f| f.gauss(nodes)).collect();
    let d = families.len();
    let total = nodes.pow(d as u32);
    let mut z = Vec::with_capacity(total);
    let mut w = Vec::with_capacity(total);
    for flat in 0..total {
        let mut rem = flat;
        let mut point = Vec::with_capacity(d);
        let mut weight = 1.0;
        for (nodes_i, weights_i) in &rules {
            let j = rem % nodes;
            rem /= nodes;
            point.push(nodes_i[j]);
            weight *= weights_i[j];
        }
        z.push(point);
        w.push(weight);
    }
    (z, w)
}

/// Polynomial chaos expansion of every model output.
pub fn chaos_fit(
    model: &Model,
    joint: &JointDistribution,
    settings: &ChaosSettings,
    rng: &mut RngStream,
) -> Result<ChaosExpansion> {
    let d = joint.dim();
    if model.input_dim() != d {
        return Err(Error::Dimension {
            expected: d,
            found: model.input_dim(),
        });
    }
    let setup = setup(joint, settings.measure)?;
    let candidate_count = match settings.truncation {
        Truncation::Fixed { count } => count,
        Truncation::Degree { degree } => cumulated_cardinal(d, degree),
        Truncation::Cleaning { max_considered, .. } => max_considered,
    };
    if candidate_count == 0 {
        return invalid("chaos basis must contain at least one term");
    }
    let candidates = enumerate_multi_indices(settings.enumeration, d, candidate_count)?;

    let (x, z, weights) = match &settings.projection {
        Projection::LeastSquares { design } | Projection::Integration { design } => {
            if matches!(design, Design::Factorial(_) | Design::Axial(_) | Design::Composite(_)) {
                return invalid("chaos projection needs a sampling or low-discrepancy design");
            }
            let unit = design.generate(d, rng)?;
            let mut x = Sample::with_labels(joint.labels().to_vec());
            let mut z = Vec::with_capacity(unit.len());
            for p in unit.rows() {
                let (xi, zi) = setup.from_unit(p, joint)?;
                x.push(&xi)?;
                z.push(zi);
            }
            let weights = match settings.projection {
                Projection::Integration { .. } => Some(vec![1.0 / unit.len() as f64; unit.len()]),
                _ => None,
            };
            (x, z, weights)
        }
        Projection::GaussProduct { nodes } => {
            if *nodes == 0 {
                return invalid("Gauss product rule needs at least one node");
            }
            let (z, w) = gauss_product(&setup.families, *nodes);
            let mut x = Sample::with_labels(joint.labels().to_vec());
            for zi in &z {
                x.push(&setup.from_measure(zi)?)?;
            }
            (x, z, Some(w))
        }
    };
    if weights.is_none() && x.len() < 2 * candidates.len() {
        return invalid(format!(
            "least squares needs at least {} design points for {} terms, got {}",
            2 * candidates.len(),
            candidates.len(),
            x.len()
        ));
    }
    let y_sample = model.evaluate(&x)?;
    let y: Vec<Vec<f64>> = y_sample.rows().map(|r| r.to_vec()).collect();
    let exp = Experiment { z, y, weights };

    let mut indices = candidates;
    let mut coefficients = project(&setup.families, &indices, &exp)?;
    if let Truncation::Cleaning { keep, significance, .. } = settings.truncation {
        let kept = clean(&coefficients, keep, significance);
        indices = kept.iter().map(|&k| indices[k].clone()).collect();
        coefficients = project(&setup.families, &indices, &exp)?;
    }

    let psi = design_matrix(&setup.families, &indices, &exp.z);
    let n = exp.z.len();
    let p = model.output_dim();
    let mut residuals = Vec::with_capacity(p);
    let mut relative_errors = Vec::with_capacity(p);
    for o in 0..p {
        let w = |i: usize| exp.weights.as_ref().map_or(1.0 / n as f64, |w| w[i]);
        let (mut sq, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let fit: f64 = (0..indices.len()).map(|k| psi[(i, k)] * coefficients[o][k]).sum();
            let yi = exp.y[i][o];
            sq += w(i) * (yi - fit).powi(2);
            m1 += w(i) * yi;
            m2 += w(i) * yi * yi;
        }
        let var = m2 - m1 * m1;
        residuals.push(sq.max(0.0).sqrt());
        relative_errors.push(if var > 0.0 { sq / var } else { 0.0 });
    }

    Ok(ChaosExpansion {
        input_names: model.input_names().to_vec(),
        output_names: model.output_names().to_vec(),
        families: setup.families,
        indices,
        coefficients,
        transform: setup.transform,
        residuals,
        relative_errors,
        iso: setup.iso,
    })
}

/// Positions of the retained terms, the constant term always first.
fn clean(coefficients: &[Vec<f64>], keep: usize, significance: f64) -> Vec<usize> {
    let k = coefficients[0].len();
    let score = |j: usize| {
        coefficients
            .iter()
            .map(|c| {
                let max = c.iter().skip(1).fold(0.0f64, |m, v| m.max(v.abs()));
                if max > 0.0 {
                    c[j].abs() / max
                } else {
                    0.0
                }
            })
            .fold(0.0, f64::max)
    };
    let mut ranked: Vec<(usize, f64)> = (1..k).map(|j| (j, score(j))).filter(|(_, s)| *s >= significance).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut kept: Vec<usize> = std::iter::once(0)
        .chain(ranked.into_iter().take(keep.saturating_sub(1)).map(|(j, _)| j))
        .collect();
    kept.sort_unstable();
    kept
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChaosSobol {
    pub labels: Vec<String>,
    pub first_order: Vec<f64>,
    pub total_order: Vec<f64>,
}

impl ChaosExpansion {
    pub fn input_dim(&self) -> usize {
        self.input_names.len()
    }

    pub fn output_dim(&self) -> usize {
        self.output_names.len()
    }

    pub fn mean(&self, output: usize) -> f64 {
        self.coefficients[output][0]
    }

    /// `Σ_{k≠0} α_k²`.
    pub fn variance(&self, output: usize) -> f64 {
        self.indices
            .iter()
            .zip(&self.coefficients[output])
            .filter(|(k, _)| k.iter().any(|&v| v > 0))
            .map(|(_, a)| a * a)
            .sum()
    }

    fn ensure_iso(&self) -> Result<Option<&IsoTransform>> {
        match (&self.transform, &self.iso) {
            (ChaosTransform::Affine { .. }, _) => Ok(None),
            (ChaosTransform::Standard { .. }, Some(iso)) => Ok(Some(iso)),
            _ => Err(Error::Numerical("expansion transform not prepared; load with from_json".into())),
        }
    }

    pub fn to_measure(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::Dimension {
                expected: self.input_dim(),
                found: x.len(),
            });
        }
        match (&self.transform, self.ensure_iso()?) {
            (ChaosTransform::Affine { shift, scale }, _) => {
                Ok(x.iter().enumerate().map(|(i, v)| (v - shift[i]) / scale[i]).collect())
            }
            (_, Some(iso)) => iso.to_standard(x),
            _ => unreachable!(),
        }
    }

    /// The reduced metamodel `ĥ(z) = Σ α_k Ψ_k(z)`.
    pub fn predict_measure(&self, z: &[f64]) -> Vec<f64> {
        let row = basis_row(&self.families, &self.indices, z);
        self.coefficients
            .iter()
            .map(|c| c.iter().zip(&row).map(|(a, p)| a * p).sum())
            .collect()
    }

    /// The metamodel `ĝ(x) = ĥ(T(x))`.
    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.predict_measure(&self.to_measure(x)?))
    }

    pub fn to_model(&self) -> Result<Model> {
        self.ensure_iso()?;
        let me = self.clone();
        Model::from_native(&self.input_names, &self.output_names, move |x| {
            me.predict(x).map_err(|e| e.to_string())
        })
    }

    pub fn sobol(&self, output: usize) -> Result<ChaosSobol> {
        chaos_sobol(self, output)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<ChaosExpansion> {
        let mut e: ChaosExpansion = serde_json::from_str(text)?;
        if let ChaosTransform::Standard { joint } = &e.transform {
            e.iso = Some(Arc::new(IsoTransform::new(joint.build()?)?));
        }
        let d = e.families.len();
        if e.input_names.len() != d || e.indices.iter().any(|k| k.len() != d) {
            return invalid("expansion dimensions are inconsistent");
        }
        if e.coefficients.len() != e.output_names.len() || e.coefficients.iter().any(|c| c.len() != e.indices.len()) {
            return invalid("expansion coefficients do not match the basis");
        }
        Ok(e)
    }
}

/// Sobol' indices read off the coefficients: `S_i` sums the terms involving `i`
/// alone, `S_Ti` every term involving `i`.
pub fn chaos_sobol(expansion: &ChaosExpansion, output: usize) -> Result<ChaosSobol> {
    if output >= expansion.output_dim() {
        return invalid(format!("output {output} out of range"));
    }
    let var = expansion.variance(output);
    if !(var > 0.0) {
        return Err(Error::Numerical("expansion has zero variance".into()));
    }
    let d = expansion.input_dim();
    let mut first = vec![0.0; d];
    let mut total = vec![0.0; d];
    for (k, a) in expansion.indices.iter().zip(&expansion.coefficients[output]) {
        let active: Vec<usize> = (0..d).filter(|&i| k[i] > 0).collect();
        for &i in &active {
            total[i] += a * a;
        }
        if active.len() == 1 {
            first[active[0]] += a * a;
        }
    }
    Ok(ChaosSobol {
        labels: expansion.input_names.clone(),
        first_order: first.into_iter().map(|v| v / var).collect(),
        total_order: total.into_iter().map(|v| v / var).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::joint::Copula;

    fn uniform() -> JointDistribution {
        JointDistribution::independent(vec![Univariate::uniform(-1.0, 1.0).unwrap()])
            .unwrap()
            .with_labels(["x"])
            .unwrap()
    }

    fn settings(truncation: Truncation, projection: Projection) -> ChaosSettings {
        ChaosSettings {
            enumeration: Enumeration::Linear,
            truncation,
            projection,
            measure: ChaosMeasure::Auto,
        }
    }

    #[test]
    fn basis_element_projects_to_unit_vector() {
        // ψ_2 of Legendre: sqrt(5) (3x² - 1) / 2.
        let m = Model::from_expressions(&["x"], &["y"], &["sqrt(5)*(3*x^2 - 1)/2"]).unwrap();
        let s = settings(
            Truncation::Degree { degree: 4 },
            Projection::LeastSquares {
                design: Design::MonteCarlo { size: 50 },
            },
        );
        let e = chaos_fit(&m, &uniform(), &s, &mut RngStream::new(1)).unwrap();
        for (k, a) in e.coefficients[0].iter().enumerate() {
            let expected = if k == 2 { 1.0 } else { 0.0 };
            assert!((a - expected).abs() < 1e-10);
        }
        assert!(e.residuals[0] < 1e-10);
    }

    #[test]
    fn least_squares_and_gauss_agree_on_polynomials() {
        let m = Model::from_expressions(&["a", "b"], &["y"], &["1 + a - 2*a*b + b^3"]).unwrap();
        let j = JointDistribution::independent(vec![
            Univariate::normal(1.0, 2.0).unwrap(),
            Univariate::uniform(0.0, 3.0).unwrap(),
        ])
        .unwrap();
        let ls = chaos_fit(
            &m,
            &j,
            &settings(
                Truncation::Degree { degree: 3 },
                Projection::LeastSquares {
                    design: Design::Lhs { size: 100 },
                },
            ),
            &mut RngStream::new(2),
        )
        .unwrap();
        let gq = chaos_fit(
            &m,
            &j,
            &settings(Truncation::Degree { degree: 3 }, Projection::GaussProduct { nodes: 4 }),
            &mut RngStream::new(2),
        )
        .unwrap();
        for (a, b) in ls.coefficients[0].iter().zip(&gq.coefficients[0]) {
            assert!((a - b).abs() < 1e-6);
        }
        let x = [0.3, 2.0];
        let exact = 1.0 + 0.3 - 2.0 * 0.3 * 2.0 + 8.0;
        assert!((ls.predict(&x).unwrap()[0] - exact).abs() < 1e-9);
    }

    #[test]
    fn interaction_only_indices() {
        let e = ChaosExpansion {
            input_names: vec!["a".into(), "b".into()],
            output_names: vec!["y".into()],
            families: vec![OrthonormalFamily::Hermite; 2],
            indices: vec![vec![0, 0], vec![1, 1]],
            coefficients: vec![vec![0.5, 2.0]],
            transform: ChaosTransform::Affine {
                shift: vec![0.0; 2],
                scale: vec![1.0; 2],
            },
            residuals: vec![0.0],
            relative_errors: vec![0.0],
            iso: None,
        };
        let s = chaos_sobol(&e, 0).unwrap();
        assert_eq!(s.first_order, vec![0.0, 0.0]);
        assert_eq!(s.total_order, vec![1.0, 1.0]);
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let m = Model::from_expressions(&["a", "b"], &["y"], &["exp(a/3) + a*b"]).unwrap();
        let j = JointDistribution::new(vec![Univariate::standard_normal(); 2], Copula::normal2(0.4).unwrap()).unwrap();
        let s = settings(Truncation::Degree { degree: 3 }, Projection::GaussProduct { nodes: 5 });
        let e = chaos_fit(&m, &j, &s, &mut RngStream::new(0)).unwrap();
        assert!(matches!(e.transform, ChaosTransform::Standard { .. }));
        let back = ChaosExpansion::from_json(&e.to_json().unwrap()).unwrap();
        assert_eq!(back.coefficients, e.coefficients);
        let x = [0.7, -1.1];
        assert_eq!(back.predict(&x).unwrap(), e.predict(&x).unwrap());
    }

    #[test]
    fn cleaning_drops_small_terms() {
        let m = Model::from_expressions(&["a", "b"], &["y"], &["a + 1e-9*b"]).unwrap();
        let j = JointDistribution::independent(vec![Univariate::standard_normal(); 2]).unwrap();
        let s = settings(
            Truncation::Cleaning {
                max_considered: 6,
                keep: 4,
                significance: 1e-4,
            },
            Projection::GaussProduct { nodes: 4 },
        );
        let e = chaos_fit(&m, &j, &s, &mut RngStream::new(0)).unwrap();
        assert_eq!(e.indices, vec![vec![0, 0], vec![1, 0]]);
    }

    #[test]
    fn unsupported_margin_and_small_design() {
        let m = Model::from_expressions(&["a"], &["y"], &["a"]).unwrap();
        let j = JointDistribution::independent(vec![Univariate::triangular(0.0, 1.0, 2.0).unwrap()]).unwrap();
        let s = settings(Truncation::Degree { degree: 2 }, Projection::GaussProduct { nodes: 3 });
        assert!(matches!(chaos_fit(&m, &j, &s, &mut RngStream::new(0)), Err(Error::Unsupported(_))));
        let s = settings(
            Truncation::Degree { degree: 4 },
            Projection::LeastSquares {
                design: Design::MonteCarlo { size: 9 },
            },
        );
        assert!(chaos_fit(&m, &uniform(), &s, &mut RngStream::new(0)).is_err());
    }
}
