use nalgebra::{DMatrix, DVector};

use crate::design::halton;
use crate::error::{invalid, Error, Result};
use crate::numeric::{bivariate_normal_cdf, norm_cdf, norm_quantile};
use crate::rng::RngStream;
use crate::sample::{ranks, Sample};

/// Number of quasi-Monte Carlo points for normal-copula cdfs beyond dimension two.
const QMC_POINTS: usize = 1 << 16;

/// Dependence structure on the unit cube.
#[derive(Debug, Clone, PartialEq)]
pub enum Copula {
    Independent(usize),
    Normal(NormalCopula),
    /// Mutually independent blocks acting on consecutive components.
    Composed(Vec<Copula>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalCopula {
    correlation: DMatrix<f64>,
    cholesky: DMatrix<f64>,
    inverse: DMatrix<f64>,
    log_det: f64,
}

impl NormalCopula {
    pub fn new(correlation: DMatrix<f64>) -> Result<Self> {
        let d = correlation.nrows();
        if d == 0 || correlation.ncols() != d {
            return invalid("correlation matrix must be square and non-empty");
        }
        for i in 0..d {
            if (correlation[(i, i)] - 1.0).abs() > 1e-12 {
                return invalid("correlation matrix must have a unit diagonal");
            }
            for j in 0..i {
                let (a, b) = (correlation[(i, j)], correlation[(j, i)]);
                if !a.is_finite() || (a - b).abs() > 1e-12 || a.abs() >= 1.0 {
                    return invalid(format!("invalid correlation entry ({i}, {j})"));
                }
            }
        }
        let chol = correlation
            .clone()
            .cholesky()
            .ok_or_else(|| Error::InvalidParameter("correlation matrix is not positive definite".into()))?;
        let cholesky = chol.l();
        let inverse = chol.inverse();
        let log_det = 2.0 * cholesky.diagonal().iter().map(|v| v.ln()).sum::<f64>();
        Ok(NormalCopula {
            correlation,
            cholesky,
            inverse,
            log_det,
        })
    }

    pub fn correlation(&self) -> &DMatrix<f64> {
        &self.correlation
    }

    /// Lower-triangular `L` with `L Lᵀ = R`.
    pub fn cholesky(&self) -> &DMatrix<f64> {
        &self.cholesky
    }

    pub fn dim(&self) -> usize {
        self.correlation.nrows()
    }

    fn log_density_scores(&self, z: &[f64]) -> f64 {
        let v = DVector::from_column_slice(z);
        let q = v.dot(&(&self.inverse * &v)) - v.dot(&v);
        -0.5 * (q + self.log_det)
    }

    fn cdf_scores(&self, z: &[f64]) -> f64 {
        match z.len() {
            1 => norm_cdf(z[0]),
            2 => bivariate_normal_cdf(z[0], z[1], self.correlation[(0, 1)]),
            d => {
                let pts = halton(QMC_POINTS, d).expect("positive size");
                let mut hits = 0usize;
                let mut g = vec![0.0; d];
                for p in pts.rows() {
                    for (gi, u) in g.iter_mut().zip(p) {
                        *gi = norm_quantile(*u);
                    }
                    let inside = (0..d).all(|i| {
                        let zi: f64 = (0..=i).map(|k| self.cholesky[(i, k)] * g[k]).sum();
                        zi <= z[i]
                    });
                    hits += usize::from(inside);
                }
                hits as f64 / QMC_POINTS as f64
            }
        }
    }
}

fn clip(u: f64) -> f64 {
    u.clamp(1e-15, 1.0 - 1e-15)
}

impl Copula {
    pub fn independent(dim: usize) -> Result<Copula> {
        if dim == 0 {
            return invalid("copula dimension must be positive");
        }
        Ok(Copula::Independent(dim))
    }

    pub fn normal(correlation: DMatrix<f64>) -> Result<Copula> {
        Ok(Copula::Normal(NormalCopula::new(correlation)?))
    }

    /// Bivariate normal copula with correlation `rho`.
    pub fn normal2(rho: f64) -> Result<Copula> {
        Copula::normal(DMatrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0]))
    }

    pub fn composed(blocks: Vec<Copula>) -> Result<Copula> {
        if blocks.is_empty() {
            return invalid("composed copula needs at least one block");
        }
        Ok(Copula::Composed(blocks))
    }

    pub fn dim(&self) -> usize {
        match self {
            Copula::Independent(d) => *d,
            Copula::Normal(n) => n.dim(),
            Copula::Composed(b) => b.iter().map(Copula::dim).sum(),
        }
    }

    pub fn is_independent(&self) -> bool {
        match self {
            Copula::Independent(_) => true,
            Copula::Normal(n) => n.correlation == DMatrix::identity(n.dim(), n.dim()),
            Copula::Composed(b) => b.iter().all(Copula::is_independent),
        }
    }

    /// Correlation matrix of the underlying Gaussian scores. Every supported copula is
    /// a normal copula with a block-diagonal matrix.
    pub fn normal_correlation(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut r = DMatrix::identity(d, d);
        self.fill_correlation(&mut r, 0);
        r
    }

    fn fill_correlation(&self, r: &mut DMatrix<f64>, offset: usize) {
        match self {
            Copula::Independent(_) => {}
            Copula::Normal(n) => {
                let d = n.dim();
                r.view_mut((offset, offset), (d, d)).copy_from(&n.correlation);
            }
            Copula::Composed(blocks) => {
                let mut o = offset;
                for b in blocks {
                    b.fill_correlation(r, o);
                    o += b.dim();
                }
            }
        }
    }

    /// Draws one point with uniform margins into `out`.
    pub fn draw_into(&self, rng: &mut RngStream, out: &mut [f64]) {
        match self {
            Copula::Independent(_) => out.iter_mut().for_each(|u| *u = rng.uniform()),
            Copula::Normal(n) => {
                let g: Vec<f64> = (0..n.dim()).map(|_| rng.normal()).collect();
                for (i, u) in out.iter_mut().enumerate() {
                    let z: f64 = (0..=i).map(|k| n.cholesky[(i, k)] * g[k]).sum();
                    *u = norm_cdf(z);
                }
            }
            Copula::Composed(blocks) => {
                let mut o = 0;
                for b in blocks {
                    let d = b.dim();
                    b.draw_into(rng, &mut out[o..o + d]);
                    o += d;
                }
            }
        }
    }

    pub fn sample(&self, n: usize, rng: &mut RngStream) -> Sample {
        let d = self.dim();
        let mut data = vec![0.0; n * d];
        for row in data.chunks_mut(d) {
            self.draw_into(rng, row);
        }
        Sample::from_flat(d, data).expect("consistent dimensions")
    }

    pub fn log_pdf(&self, u: &[f64]) -> f64 {
        if u.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return f64::NEG_INFINITY;
        }
        match self {
            Copula::Independent(_) => 0.0,
            Copula::Normal(n) => {
                let z: Vec<f64> = u.iter().map(|&v| norm_quantile(clip(v))).collect();
                n.log_density_scores(&z)
            }
            Copula::Composed(blocks) => {
                let mut o = 0;
                let mut acc = 0.0;
                for b in blocks {
                    let d = b.dim();
                    acc += b.log_pdf(&u[o..o + d]);
                    o += d;
                }
                acc
            }
        }
    }

    pub fn pdf(&self, u: &[f64]) -> f64 {
        self.log_pdf(u).exp()
    }

    /// Copula cdf: exact up to dimension two, quasi-Monte Carlo beyond.
    pub fn cdf(&self, u: &[f64]) -> f64 {
        if u.iter().any(|&v| v <= 0.0) {
            return 0.0;
        }
        let u: Vec<f64> = u.iter().map(|v| v.min(1.0)).collect();
        match self {
            Copula::Independent(_) => u.iter().product(),
            Copula::Normal(n) => {
                // Components at one drop out of the normal probability.
                let keep: Vec<usize> = (0..u.len()).filter(|&i| u[i] < 1.0).collect();
                if keep.is_empty() {
                    return 1.0;
                }
                let z: Vec<f64> = keep.iter().map(|&i| norm_quantile(u[i])).collect();
                if keep.len() == u.len() {
                    n.cdf_scores(&z)
                } else {
                    let sub = DMatrix::from_fn(keep.len(), keep.len(), |a, b| n.correlation[(keep[a], keep[b])]);
                    NormalCopula::new(sub).expect("principal minor of a valid matrix").cdf_scores(&z)
                }
            }
            Copula::Composed(blocks) => {
                let mut o = 0;
                let mut acc = 1.0;
                for b in blocks {
                    let d = b.dim();
                    acc *= b.cdf(&u[o..o + d]);
                    o += d;
                }
                acc
            }
        }
    }
}

/// Normal-copula estimate from a sample: correlation of the normal scores of the
/// ranks `Φ^{-1}(r / (n + 1))`.
pub fn fit_normal_copula(sample: &Sample) -> Result<Copula> {
    let n = sample.len();
    let d = sample.dim();
    if n < 3 || d == 0 {
        return invalid("copula estimation needs at least three points");
    }
    let cols: Vec<Vec<f64>> = (0..d)
        .map(|j| {
            ranks(&sample.column(j))
                .into_iter()
                .map(|r| norm_quantile(r / (n + 1) as f64))
                .collect()
        })
        .collect();
    let scores = Sample::from_columns(&cols)?;
    let mut r = scores.correlation();
    for i in 0..d {
        if !r[(i, i)].is_finite() {
            return invalid("constant column in copula estimation");
        }
        r[(i, i)] = 1.0;
    }
    Copula::normal(r)
}
