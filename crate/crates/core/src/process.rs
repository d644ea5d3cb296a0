//! Stochastic processes on a one-dimensional mesh.

use std::io;
use std::sync::Arc;

use uq_expr::Expression;

use crate::error::{invalid, Error, Result};
use crate::joint::JointDistribution;
use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<f64>,
}

impl Mesh {
    pub fn new(vertices: Vec<f64>) -> Result<Mesh> {
        if vertices.is_empty() {
            return invalid("mesh needs at least one vertex");
        }
        if vertices.iter().any(|v| !v.is_finite()) || vertices.windows(2).any(|w| w[1] <= w[0]) {
            return invalid("mesh vertices must be finite and strictly increasing");
        }
        Ok(Mesh { vertices })
    }

    /// `n` equally spaced vertices from `start` with spacing `step`.
    pub fn regular(start: f64, step: f64, n: usize) -> Result<Mesh> {
        if !(step > 0.0) {
            return invalid("mesh step must be positive");
        }
        Mesh::new((0..n).map(|k| start + k as f64 * step).collect())
    }

    pub fn vertices(&self) -> &[f64] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// One realization: a point of `R^d` per mesh vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    mesh: Arc<Mesh>,
    dim: usize,
    values: Vec<f64>,
}

impl Field {
    pub fn new(mesh: Arc<Mesh>, dim: usize, values: Vec<f64>) -> Result<Field> {
        if dim == 0 || values.len() != mesh.len() * dim {
            return Err(Error::Dimension {
                expected: mesh.len() * dim.max(1),
                found: values.len(),
            });
        }
        Ok(Field { mesh, dim, values })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    /// Values of component `j` along the mesh.
    pub fn component(&self, j: usize) -> Vec<f64> {
        self.values.iter().skip(j).step_by(self.dim).copied().collect()
    }

    /// Vertexwise map `R^d -> R^d`.
    pub fn map(&self, f: impl Fn(f64, &[f64]) -> Vec<f64>) -> Result<Field> {
        let mut values = Vec::with_capacity(self.values.len());
        for (k, &t) in self.mesh.vertices().iter().enumerate() {
            let v = f(t, self.value(k));
            if v.len() != self.dim {
                return Err(Error::Dimension {
                    expected: self.dim,
                    found: v.len(),
                });
            }
            values.extend(v);
        }
        Field::new(self.mesh.clone(), self.dim, values)
    }

    /// Vertexwise sum of two fields on the same mesh.
    pub fn add(&self, other: &Field) -> Result<Field> {
        if self.mesh != other.mesh || self.dim != other.dim {
            return invalid("fields live on different meshes or dimensions");
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Field::new(self.mesh.clone(), self.dim, values)
    }

    /// Adds the trend `m(t)` (one value per component).
    pub fn add_trend(&self, trend: &[Expression]) -> Result<Field> {
        self.shift(trend, 1.0)
    }

    pub fn remove_trend(&self, trend: &[Expression]) -> Result<Field> {
        self.shift(trend, -1.0)
    }

    fn shift(&self, trend: &[Expression], sign: f64) -> Result<Field> {
        if trend.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                found: trend.len(),
            });
        }
        let mut values = self.values.clone();
        for (k, &t) in self.mesh.vertices().iter().enumerate() {
            for (j, m) in trend.iter().enumerate() {
                values[k * self.dim + j] += sign * m.eval(&[t])?;
            }
        }
        Field::new(self.mesh.clone(), self.dim, values)
    }

    pub fn write_csv<W: io::Write>(&self, writer: W, labels: &[String]) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["t".to_owned()];
        header.extend(labels.iter().cloned());
        w.write_record(&header)?;
        for (k, t) in self.mesh.vertices().iter().enumerate() {
            let mut rec = vec![t.to_string()];
            rec.extend(self.value(k).iter().map(f64::to_string));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Independent draws of `dist` at every vertex.
pub fn white_noise(dist: &JointDistribution, mesh: Arc<Mesh>, rng: &mut RngStream) -> Field {
    let d = dist.dim();
    let mut values = vec![0.0; mesh.len() * d];
    for chunk in values.chunks_mut(d) {
        dist.draw_into(rng, chunk);
    }
    Field::new(mesh, d, values).expect("consistent dimensions")
}

/// `X(t_0) = origin`, `X(t_k) = X(t_{k-1}) + step_k`.
pub fn random_walk(
    origin: &[f64],
    step: &JointDistribution,
    mesh: Arc<Mesh>,
    rng: &mut RngStream,
) -> Result<Field> {
    let d = step.dim();
    if origin.len() != d {
        return Err(Error::Dimension {
            expected: d,
            found: origin.len(),
        });
    }
    let mut values = Vec::with_capacity(mesh.len() * d);
    values.extend_from_slice(origin);
    let mut draw = vec![0.0; d];
    for k in 1..mesh.len() {
        step.draw_into(rng, &mut draw);
        for j in 0..d {
            let prev = values[(k - 1) * d + j];
            values.push(prev + draw[j]);
        }
    }
    Field::new(mesh, d, values)
}

/// Scalar process `X(t) = Σ A_i φ_i(t)` with one coefficient draw per realization.
#[derive(Debug, Clone)]
pub struct FunctionalBasisProcess {
    coefficients: JointDistribution,
    basis: Vec<Expression>,
}

impl FunctionalBasisProcess {
    pub fn new(coefficients: JointDistribution, basis: Vec<Expression>) -> Result<Self> {
        if coefficients.dim() != basis.len() {
            return Err(Error::Dimension {
                expected: basis.len(),
                found: coefficients.dim(),
            });
        }
        if basis.iter().any(|f| f.input_dim() != 1) {
            return invalid("basis functions take one variable");
        }
        Ok(FunctionalBasisProcess { coefficients, basis })
    }

    pub fn realization(&self, mesh: Arc<Mesh>, rng: &mut RngStream) -> Result<Field> {
        let mut a = vec![0.0; self.basis.len()];
        self.coefficients.draw_into(rng, &mut a);
        self.evaluate(&a, mesh)
    }

    /// Field for fixed coefficients.
    pub fn evaluate(&self, a: &[f64], mesh: Arc<Mesh>) -> Result<Field> {
        let mut values = Vec::with_capacity(mesh.len());
        for &t in mesh.vertices() {
            let mut v = 0.0;
            for (ai, f) in a.iter().zip(&self.basis) {
                v += ai * f.eval(&[t])?;
            }
            values.push(v);
        }
        Field::new(mesh, 1, values)
    }
}
