use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::Model;
use crate::numeric::golden_section;
use crate::sample::Sample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Constant,
    Linear,
    Quadratic,
}

impl Trend {
    pub fn size(&self, d: usize) -> usize {
        match self {
            Trend::Constant => 1,
            Trend::Linear => 1 + d,
            Trend::Quadratic => 1 + d + d * (d + 1) / 2,
        }
    }

    pub fn basis(&self, x: &[f64]) -> Vec<f64> {
        let mut f = vec![1.0];
        if matches!(self, Trend::Linear | Trend::Quadratic) {
            f.extend_from_slice(x);
        }
        if matches!(self, Trend::Quadratic) {
            for i in 0..x.len() {
                for j in i..x.len() {
                    f.push(x[i] * x[j]);
                }
            }
        }
        f
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceKind {
    /// `exp(-½ Σ (h_i/θ_i)²)`.
    SquaredExponential,
    /// `exp(-‖h/θ‖)`.
    Exponential,
}

impl CovarianceKind {
    pub fn correlation(&self, a: &[f64], b: &[f64], theta: &[f64]) -> f64 {
        let s: f64 = a.iter().zip(b).zip(theta).map(|((x, y), t)| ((x - y) / t).powi(2)).sum();
        match self {
            CovarianceKind::SquaredExponential => (-0.5 * s).exp(),
            CovarianceKind::Exponential => (-s.sqrt()).exp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KrigingSettings {
    pub trend: Trend,
    pub covariance: CovarianceKind,
    pub theta_lower: Vec<f64>,
    pub theta_upper: Vec<f64>,
    #[serde(default = "default_nugget")]
    pub nugget: f64,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
}

fn default_nugget() -> f64 {
    1e-10
}

fn default_restarts() -> usize {
    10
}

impl KrigingSettings {
    pub fn new(trend: Trend, covariance: CovarianceKind, theta_lower: Vec<f64>, theta_upper: Vec<f64>) -> Self {
        KrigingSettings {
            trend,
            covariance,
            theta_lower,
            theta_upper,
            nugget: default_nugget(),
            restarts: default_restarts(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KrigingModel {
    pub input_names: Vec<String>,
    pub trend: Trend,
    pub covariance: CovarianceKind,
    pub theta: Vec<f64>,
    /// Process variance `σ²`, profiled in closed form.
    pub sigma2: f64,
    /// Nugget added to the correlation diagonal (possibly raised during the fit).
    pub nugget: f64,
    pub beta: Vec<f64>,
    pub log_likelihood: f64,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    #[serde(skip)]
    state: Option<State>,
}

#[derive(Debug, Clone)]
struct State {
    chol: DMatrix<f64>,
    /// `L^{-1} F`.
    ft: DMatrix<f64>,
    /// Upper factor of `Fᵀ R^{-1} F = Rfᵀ Rf`.
    rf: DMatrix<f64>,
    /// `R^{-1} (y - F β)`.
    gamma: DVector<f64>,
}

/// GLS fit for a fixed `θ`; `Err` when the Cholesky factorization fails.
fn fit_fixed(
    x: &[Vec<f64>],
    y: &[f64],
    trend: Trend,
    kind: CovarianceKind,
    theta: &[f64],
    nugget: f64,
) -> Option<(State, Vec<f64>, f64, f64)> {
    let n = x.len();
    let r = DMatrix::from_fn(n, n, |i, j| {
        kind.correlation(&x[i], &x[j], theta) + if i == j { nugget } else { 0.0 }
    });
    let chol = r.cholesky()?.l();
    let fm = DMatrix::from_fn(n, trend.size(x[0].len()), |i, k| trend.basis(&x[i])[k]);
    let ft = chol.solve_lower_triangular(&fm)?;
    let yt = chol.solve_lower_triangular(&DVector::from_column_slice(y))?;
    let qr = ft.clone().qr();
    let rf = qr.r();
    let beta = rf.solve_upper_triangular(&(qr.q().transpose() * &yt))?;
    let resid_t = &yt - &ft * &beta;
    let sigma2 = resid_t.norm_squared() / n as f64;
    let gamma = chol.transpose().solve_upper_triangular(&resid_t)?;
    let log_det: f64 = 2.0 * chol.diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let ll = if sigma2 > 0.0 {
        -0.5 * (n as f64 * sigma2.ln() + log_det)
    } else {
        f64::INFINITY
    };
    Some((State { chol, ft, rf, gamma }, beta.iter().copied().collect(), sigma2, ll))
}

/// Fit with nugget escalation: the nugget grows tenfold on Cholesky failure, up to 1e-6.
fn fit_with_nugget(
    x: &[Vec<f64>],
    y: &[f64],
    trend: Trend,
    kind: CovarianceKind,
    theta: &[f64],
    nugget: f64,
) -> Result<(State, Vec<f64>, f64, f64, f64)> {
    let mut nug = nugget;
    loop {
        if let Some((s, b, s2, ll)) = fit_fixed(x, y, trend, kind, theta, nug) {
            return Ok((s, b, s2, ll, nug));
        }
        if nug >= 1e-6 {
            return Err(Error::Numerical(format!("correlation matrix not positive definite at theta {theta:?}")));
        }
        nug = (nug * 10.0).max(1e-12).min(1e-6);
    }
}

fn validate(x: &Sample, y: &[f64], settings: &KrigingSettings) -> Result<Vec<Vec<f64>>> {
    let (n, d) = (x.len(), x.dim());
    if y.len() != n {
        return Err(Error::Dimension { expected: n, found: y.len() });
    }
    if n < settings.trend.size(d) {
        return invalid(format!("kriging needs at least {} points for this trend", settings.trend.size(d)));
    }
    if settings.theta_lower.len() != d || settings.theta_upper.len() != d {
        return Err(Error::Dimension {
            expected: d,
            found: settings.theta_lower.len(),
        });
    }
    if settings
        .theta_lower
        .iter()
        .zip(&settings.theta_upper)
        .any(|(l, u)| !(*l > 0.0 && l <= u))
    {
        return invalid("theta bounds must satisfy 0 < lower <= upper");
    }
    let rows: Vec<Vec<f64>> = x.rows().map(|r| r.to_vec()).collect();
    for i in 0..n {
        for j in 0..i {
            if rows[i] == rows[j] {
                return invalid(format!("duplicate design rows {j} and {i}"));
            }
        }
    }
    Ok(rows)
}

/// Maximizes the profiled log-likelihood over the `θ` box by coordinate search in
/// `log θ`: each coordinate is scanned on a grid and refined by golden section,
/// from `restarts` starting points spread over the box.
pub fn kriging_fit(x: &Sample, y: &[f64], settings: &KrigingSettings) -> Result<KrigingModel> {
    let rows = validate(x, y, settings)?;
    let d = x.dim();
    let lo: Vec<f64> = settings.theta_lower.iter().map(|v| v.ln()).collect();
    let hi: Vec<f64> = settings.theta_upper.iter().map(|v| v.ln()).collect();
    let objective = |t: &[f64]| -> f64 {
        let theta: Vec<f64> = t.iter().map(|v| v.exp()).collect();
        match fit_with_nugget(&rows, y, settings.trend, settings.covariance, &theta, settings.nugget) {
            Ok((_, _, _, ll, _)) if ll.is_finite() => -ll,
            _ => f64::INFINITY,
        }
    };
    const GRID: usize = 20;
    let mut best: Option<(f64, Vec<f64>)> = None;
    for r in 0..settings.restarts.max(1) {
        let frac = (r as f64 + 0.5) / settings.restarts.max(1) as f64;
        let mut t: Vec<f64> = (0..d).map(|i| lo[i] + frac * (hi[i] - lo[i])).collect();
        let mut value = objective(&t);
        for _sweep in 0..10 {
            let before = value;
            for i in 0..d {
                if hi[i] == lo[i] {
                    continue;
                }
                let step = (hi[i] - lo[i]) / GRID as f64;
                let mut arg = t[i];
                let mut val = value;
                for g in 0..=GRID {
                    let mut c = t.clone();
                    c[i] = lo[i] + g as f64 * step;
                    let v = objective(&c);
                    if v < val {
                        val = v;
                        arg = c[i];
                    }
                }
                let a = (arg - step).max(lo[i]);
                let b = (arg + step).min(hi[i]);
                let (xg, vg) = golden_section(
                    |s| {
                        let mut c = t.clone();
                        c[i] = s;
                        objective(&c)
                    },
                    a,
                    b,
                    1e-8,
                );
                if vg < val {
                    arg = xg;
                    val = vg;
                }
                t[i] = arg;
                value = val;
            }
            if (before - value).abs() <= 1e-10 * (1.0 + value.abs()) {
                break;
            }
        }
        if best.as_ref().is_none_or(|(v, _)| value < *v) {
            best = Some((value, t));
        }
    }
    let (_, t) = best.expect("at least one restart");
    let theta: Vec<f64> = t.iter().map(|v| v.exp()).collect();
    KrigingModel::with_theta_rows(x.labels().to_vec(), rows, y.to_vec(), settings, theta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KrigingPrediction {
    pub mean: f64,
    pub variance: f64,
    /// The raw variance was negative and has been clipped to zero.
    pub clipped: bool,
}

pub fn kriging_predict(model: &KrigingModel, x: &[f64]) -> Result<KrigingPrediction> {
    model.predict(x)
}

impl KrigingModel {
    /// Fit for a fixed `θ` (no likelihood search).
    pub fn with_theta(x: &Sample, y: &[f64], settings: &KrigingSettings, theta: Vec<f64>) -> Result<KrigingModel> {
        let rows = validate(x, y, settings)?;
        KrigingModel::with_theta_rows(x.labels().to_vec(), rows, y.to_vec(), settings, theta)
    }

    fn with_theta_rows(
        input_names: Vec<String>,
        x: Vec<Vec<f64>>,
        y: Vec<f64>,
        settings: &KrigingSettings,
        theta: Vec<f64>,
    ) -> Result<KrigingModel> {
        let (state, beta, sigma2, log_likelihood, nugget) =
            fit_with_nugget(&x, &y, settings.trend, settings.covariance, &theta, settings.nugget)?;
        Ok(KrigingModel {
            input_names,
            trend: settings.trend,
            covariance: settings.covariance,
            theta,
            sigma2,
            nugget,
            beta,
            log_likelihood,
            x,
            y,
            state: Some(state),
        })
    }

    fn state(&self) -> Result<&State> {
        self.state
            .as_ref()
            .ok_or_else(|| Error::Numerical("kriging model not prepared; load with from_json".into()))
    }

    pub fn input_dim(&self) -> usize {
        self.input_names.len()
    }

    pub fn predict(&self, x: &[f64]) -> Result<KrigingPrediction> {
        if x.len() != self.input_dim() {
            return Err(Error::Dimension {
                expected: self.input_dim(),
                found: x.len(),
            });
        }
        let s = self.state()?;
        let f = DVector::from_vec(self.trend.basis(x));
        let r = DVector::from_iterator(
            self.x.len(),
            self.x.iter().map(|xi| self.covariance.correlation(x, xi, &self.theta)),
        );
        let mean = f.dot(&DVector::from_column_slice(&self.beta)) + r.dot(&s.gamma);
        let v = s
            .chol
            .solve_lower_triangular(&r)
            .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
        let u = s.ft.transpose() * &v - f;
        let w = s
            .rf
            .transpose()
            .solve_lower_triangular(&u)
            .ok_or_else(|| Error::Numerical("singular trend factor".into()))?;
        let raw = self.sigma2 * (1.0 - v.norm_squared() + w.norm_squared());
        Ok(KrigingPrediction {
            mean,
            variance: raw.max(0.0),
            clipped: raw < 0.0,
        })
    }

    /// Standardized leave-one-out residuals `(y_i - m_{-i}(x_i)) / s_{-i}(x_i)` at fixed `θ`.
    pub fn leave_one_out(&self) -> Result<Vec<f64>> {
        let settings = KrigingSettings {
            trend: self.trend,
            covariance: self.covariance,
            theta_lower: self.theta.clone(),
            theta_upper: self.theta.clone(),
            nugget: self.nugget,
            restarts: 1,
        };
        (0..self.x.len())
            .map(|i| {
                let xs: Vec<Vec<f64>> = (0..self.x.len()).filter(|&j| j != i).map(|j| self.x[j].clone()).collect();
                let ys: Vec<f64> = (0..self.y.len()).filter(|&j| j != i).map(|j| self.y[j]).collect();
                let m = KrigingModel::with_theta_rows(self.input_names.clone(), xs, ys, &settings, self.theta.clone())?;
                let p = m.predict(&self.x[i])?;
                Ok((self.y[i] - p.mean) / p.variance.sqrt())
            })
            .collect()
    }

    pub fn to_model(&self, output: &str) -> Result<Model> {
        self.state()?;
        let me = self.clone();
        Model::from_native(&self.input_names, &[output], move |x| {
            me.predict(x).map(|p| vec![p.mean]).map_err(|e| e.to_string())
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<KrigingModel> {
        let m: KrigingModel = serde_json::from_str(text)?;
        if m.x.is_empty() || m.x.len() != m.y.len() || m.x.iter().any(|r| r.len() != m.input_dim()) {
            return invalid("kriging data are inconsistent");
        }
        let (state, ..) = fit_fixed(&m.x, &m.y, m.trend, m.covariance, &m.theta, m.nugget)
            .ok_or_else(|| Error::Numerical("stored kriging model does not factorize".into()))?;
        Ok(KrigingModel { state: Some(state), ..m })
    }
}
