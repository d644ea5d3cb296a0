//! Vector functions `G: R^d -> R^p` with derivative policies and batch evaluation.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use rayon::prelude::*;
use uq_expr::{derivative, parse, Expression};

use crate::error::{invalid, Error, Result};
use crate::sample::Sample;
use crate::wrapper::WrapperProtocol;

pub type NativeFn = Arc<dyn Fn(&[f64]) -> std::result::Result<Vec<f64>, String> + Send + Sync>;
/// Returns the `p x d` Jacobian.
pub type NativeJacobian =
    Arc<dyn Fn(&[f64]) -> std::result::Result<DMatrix<f64>, String> + Send + Sync>;

#[derive(Clone)]
pub enum Backend {
    Expressions(Vec<Expression>),
    Native(NativeFn),
    Wrapper(Arc<WrapperProtocol>),
}

impl fmt::Debug for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::Expressions(e) => {
                let texts: Vec<String> = e.iter().map(ToString::to_string).collect();
                f.debug_tuple("Expressions").field(&texts).finish()
            }
            Backend::Native(_) => f.write_str("Native"),
            Backend::Wrapper(w) => f.debug_tuple("Wrapper").field(w).finish(),
        }
    }
}

#[derive(Clone)]
pub enum GradientPolicy {
    Symbolic,
    /// Centered differences; `None` selects the default steps.
    FiniteDifference(Option<Vec<f64>>),
    UserSupplied(NativeJacobian),
}

impl fmt::Debug for GradientPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GradientPolicy::Symbolic => f.write_str("Symbolic"),
            GradientPolicy::FiniteDifference(h) => f.debug_tuple("FiniteDifference").field(h).finish(),
            GradientPolicy::UserSupplied(_) => f.write_str("UserSupplied"),
        }
    }
}

/// Default centered-difference step for the gradient: `max(1e-5 |x|, 1e-7)`.
pub fn default_gradient_steps(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| (1e-5 * v.abs()).max(1e-7)).collect()
}

/// Default step for second differences: `max(1e-3 |x|, 1e-4)`.
pub fn default_hessian_steps(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| (1e-3 * v.abs()).max(1e-4)).collect()
}

pub struct Model {
    input_names: Vec<String>,
    output_names: Vec<String>,
    backend: Backend,
    gradient_policy: GradientPolicy,
    symbolic_gradient: Option<Vec<Vec<Expression>>>,
    symbolic_hessian: OnceLock<std::result::Result<Vec<Vec<Vec<Expression>>>, String>>,
    counter: AtomicU64,
}

impl fmt::Debug for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Model")
            .field("inputs", &self.input_names)
            .field("outputs", &self.output_names)
            .field("backend", &self.backend)
            .field("gradient", &self.gradient_policy)
            .finish()
    }
}

impl Clone for Model {
    /// Clones share no counter: the copy starts at zero evaluations.
    fn clone(&self) -> Self {
        Model {
            input_names: self.input_names.clone(),
            output_names: self.output_names.clone(),
            backend: self.backend.clone(),
            gradient_policy: self.gradient_policy.clone(),
            symbolic_gradient: self.symbolic_gradient.clone(),
            symbolic_hessian: OnceLock::new(),
            counter: AtomicU64::new(0),
        }
    }
}

fn names<S: AsRef<str>>(v: &[S]) -> Vec<String> {
    v.iter().map(|s| s.as_ref().to_owned()).collect()
}

impl Model {
    fn build(input_names: Vec<String>, output_names: Vec<String>, backend: Backend) -> Result<Model> {
        if input_names.is_empty() || output_names.is_empty() {
            return invalid("model needs at least one input and one output");
        }
        let policy = match backend {
            Backend::Expressions(_) => GradientPolicy::Symbolic,
            _ => GradientPolicy::FiniteDifference(None),
        };
        let mut model = Model {
            input_names,
            output_names,
            backend,
            gradient_policy: GradientPolicy::FiniteDifference(None),
            symbolic_gradient: None,
            symbolic_hessian: OnceLock::new(),
            counter: AtomicU64::new(0),
        };
        if matches!(policy, GradientPolicy::Symbolic) {
            // Fall back to finite differences when an expression is not differentiable.
            if let Ok(m) = model.clone_with_gradient(GradientPolicy::Symbolic) {
                model = m;
            }
        }
        Ok(model)
    }

    /// Analytical model: one formula per output over the named inputs.
    pub fn from_expressions<S: AsRef<str>, T: AsRef<str>, U: AsRef<str>>(
        inputs: &[S],
        outputs: &[T],
        formulas: &[U],
    ) -> Result<Model> {
        if outputs.len() != formulas.len() {
            return Err(Error::Dimension {
                expected: outputs.len(),
                found: formulas.len(),
            });
        }
        let exprs = formulas
            .iter()
            .map(|f| parse(f.as_ref(), inputs))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Model::build(names(inputs), names(outputs), Backend::Expressions(exprs))
    }

    pub fn from_native<S: AsRef<str>, T: AsRef<str>>(
        inputs: &[S],
        outputs: &[T],
        f: impl Fn(&[f64]) -> std::result::Result<Vec<f64>, String> + Send + Sync + 'static,
    ) -> Result<Model> {
        Model::build(names(inputs), names(outputs), Backend::Native(Arc::new(f)))
    }

    pub fn from_wrapper<S: AsRef<str>, T: AsRef<str>>(
        inputs: &[S],
        outputs: &[T],
        protocol: WrapperProtocol,
    ) -> Result<Model> {
        if protocol.anchors.len() != outputs.len() {
            return Err(Error::Dimension {
                expected: outputs.len(),
                found: protocol.anchors.len(),
            });
        }
        protocol.check_placeholders(&names(inputs))?;
        Model::build(
            names(inputs),
            names(outputs),
            Backend::Wrapper(Arc::new(protocol)),
        )
    }

    fn clone_with_gradient(&self, policy: GradientPolicy) -> Result<Model> {
        let symbolic_gradient = match (&policy, &self.backend) {
            (GradientPolicy::Symbolic, Backend::Expressions(exprs)) => Some(
                exprs
                    .iter()
                    .map(|e| (0..self.input_dim()).map(|i| derivative(e, i)).collect())
                    .collect::<std::result::Result<Vec<Vec<_>>, _>>()?,
            ),
            (GradientPolicy::Symbolic, _) => {
                return invalid("symbolic gradients require an expression backend")
            }
            (GradientPolicy::FiniteDifference(Some(h)), _) => {
                if h.len() != self.input_dim() || h.iter().any(|&v| !(v > 0.0)) {
                    return invalid("finite-difference steps must be positive, one per input");
                }
                None
            }
            _ => None,
        };
        Ok(Model {
            input_names: self.input_names.clone(),
            output_names: self.output_names.clone(),
            backend: self.backend.clone(),
            gradient_policy: policy,
            symbolic_gradient,
            symbolic_hessian: OnceLock::new(),
            counter: AtomicU64::new(self.evaluations()),
        })
    }

    /// Replaces the gradient policy. Symbolic requires an expression backend whose
    /// formulas are differentiable.
    pub fn with_gradient(self, policy: GradientPolicy) -> Result<Model> {
        self.clone_with_gradient(policy)
    }

    pub fn with_output_names<S: AsRef<str>>(mut self, outputs: &[S]) -> Result<Model> {
        if outputs.len() != self.output_dim() {
            return Err(Error::Dimension {
                expected: self.output_dim(),
                found: outputs.len(),
            });
        }
        self.output_names = names(outputs);
        Ok(self)
    }

    pub fn input_dim(&self) -> usize {
        self.input_names.len()
    }

    pub fn output_dim(&self) -> usize {
        self.output_names.len()
    }

    pub fn input_names(&self) -> &[String] {
        &self.input_names
    }

    pub fn output_names(&self) -> &[String] {
        &self.output_names
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    pub fn gradient_policy(&self) -> &GradientPolicy {
        &self.gradient_policy
    }

    /// Number of points evaluated so far, finite-difference stencils included.
    pub fn evaluations(&self) -> u64 {
        self.counter.load(Ordering::Relaxed)
    }

    fn eval_raw(&self, x: &[f64], run: u64) -> Result<Vec<f64>> {
        match &self.backend {
            Backend::Expressions(exprs) => exprs
                .iter()
                .map(|e| e.eval(x).map_err(Error::from))
                .collect(),
            Backend::Native(f) => {
                let y = f(x).map_err(Error::Backend)?;
                if y.len() != self.output_dim() {
                    return Err(Error::Dimension {
                        expected: self.output_dim(),
                        found: y.len(),
                    });
                }
                Ok(y)
            }
            Backend::Wrapper(w) => w.run(&self.input_names, x, run),
        }
    }

    /// Evaluates a single point.
    pub fn call(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::Dimension {
                expected: self.input_dim(),
                found: x.len(),
            });
        }
        let run = self.counter.fetch_add(1, Ordering::Relaxed);
        self.eval_raw(x, run)
    }

    /// First output at `x`.
    pub fn scalar(&self, x: &[f64]) -> Result<f64> {
        Ok(self.call(x)?[0])
    }

    /// Evaluates every row, possibly in parallel; output rows keep the input order.
    /// The first failing row (lowest index) is reported.
    pub fn evaluate(&self, points: &Sample) -> Result<Sample> {
        if points.dim() != self.input_dim() {
            return Err(Error::Dimension {
                expected: self.input_dim(),
                found: points.dim(),
            });
        }
        let n = points.len();
        let base = self.counter.fetch_add(n as u64, Ordering::Relaxed);
        let results: Vec<Result<Vec<f64>>> = (0..n)
            .into_par_iter()
            .map(|i| self.eval_raw(points.row(i), base + i as u64))
            .collect();
        let mut out = Sample::with_labels(self.output_names.clone());
        for (row, r) in results.into_iter().enumerate() {
            match r {
                Ok(y) => out.push(&y)?,
                Err(e) => {
                    return Err(Error::Evaluation {
                        row,
                        message: e.to_string(),
                    })
                }
            }
        }
        Ok(out)
    }

    /// Evaluates a batch given as a list of points.
    pub fn evaluate_points(&self, points: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        if points.is_empty() {
            return Ok(Vec::new());
        }
        let sample = Sample::from_rows(points)?;
        Ok(self.evaluate(&sample)?.rows().map(<[f64]>::to_vec).collect())
    }

    /// Jacobian (`p x d`) according to the gradient policy.
    pub fn gradient(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::Dimension {
                expected: self.input_dim(),
                found: x.len(),
            });
        }
        match &self.gradient_policy {
            GradientPolicy::Symbolic => {
                let grads = self.symbolic_gradient.as_ref().expect("symbolic gradient cached");
                let mut m = DMatrix::zeros(self.output_dim(), self.input_dim());
                for (k, row) in grads.iter().enumerate() {
                    for (i, g) in row.iter().enumerate() {
                        m[(k, i)] = g.eval(x)?;
                    }
                }
                Ok(m)
            }
            GradientPolicy::FiniteDifference(h) => {
                let h = h.clone().unwrap_or_else(|| default_gradient_steps(x));
                self.fd_gradient(x, &h)
            }
            GradientPolicy::UserSupplied(j) => {
                let m = j(x).map_err(Error::Backend)?;
                if m.shape() != (self.output_dim(), self.input_dim()) {
                    return invalid("user-supplied Jacobian has the wrong shape");
                }
                Ok(m)
            }
        }
    }

    /// Hessian of every output. Symbolic for differentiable expressions, centered
    /// second differences otherwise.
    pub fn hessian(&self, x: &[f64]) -> Result<Vec<DMatrix<f64>>> {
        if let GradientPolicy::Symbolic = self.gradient_policy {
            let grads = self.symbolic_gradient.as_ref().expect("symbolic gradient cached");
            let second = self.symbolic_hessian.get_or_init(|| {
                grads
                    .iter()
                    .map(|row| {
                        row.iter()
                            .map(|g| (0..self.input_dim()).map(|j| derivative(g, j)).collect())
                            .collect()
                    })
                    .collect::<std::result::Result<Vec<Vec<Vec<_>>>, _>>()
                    .map_err(|e| e.to_string())
            });
            if let Ok(second) = second {
                let d = self.input_dim();
                return second
                    .iter()
                    .map(|rows| {
                        let mut h = DMatrix::zeros(d, d);
                        for i in 0..d {
                            for j in 0..d {
                                h[(i, j)] = rows[i][j].eval(x)?;
                            }
                        }
                        Ok((&h + h.transpose()) * 0.5)
                    })
                    .collect();
            }
        }
        self.fd_hessian(x, &default_hessian_steps(x))
    }

    /// Centered-difference Jacobian with steps `h`.
    pub fn fd_gradient(&self, x: &[f64], h: &[f64]) -> Result<DMatrix<f64>> {
        let d = self.input_dim();
        if h.len() != d || x.len() != d {
            return Err(Error::Dimension {
                expected: d,
                found: h.len().min(x.len()),
            });
        }
        if h.iter().any(|&v| !(v > 0.0)) {
            return invalid("finite-difference steps must be positive");
        }
        let mut stencil = Vec::with_capacity(2 * d);
        for i in 0..d {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += h[i];
            xm[i] -= h[i];
            stencil.push(xp);
            stencil.push(xm);
        }
        let values = self.evaluate_points(&stencil)?;
        let p = self.output_dim();
        Ok(DMatrix::from_fn(p, d, |k, i| {
            (values[2 * i][k] - values[2 * i + 1][k]) / (2.0 * h[i])
        }))
    }

    /// Centered second-difference Hessian per output, symmetrized.
    pub fn fd_hessian(&self, x: &[f64], h: &[f64]) -> Result<Vec<DMatrix<f64>>> {
        let d = self.input_dim();
        if h.len() != d || x.len() != d {
            return Err(Error::Dimension {
                expected: d,
                found: h.len().min(x.len()),
            });
        }
        if h.iter().any(|&v| !(v > 0.0)) {
            return invalid("finite-difference steps must be positive");
        }
        let shifted = |moves: &[(usize, f64)]| {
            let mut y = x.to_vec();
            for &(i, s) in moves {
                y[i] += s * h[i];
            }
            y
        };
        let mut stencil = vec![x.to_vec()];
        for i in 0..d {
            stencil.push(shifted(&[(i, 1.0)]));
            stencil.push(shifted(&[(i, -1.0)]));
        }
        for i in 0..d {
            for j in 0..i {
                stencil.push(shifted(&[(i, 1.0), (j, 1.0)]));
                stencil.push(shifted(&[(i, 1.0), (j, -1.0)]));
                stencil.push(shifted(&[(i, -1.0), (j, 1.0)]));
                stencil.push(shifted(&[(i, -1.0), (j, -1.0)]));
            }
        }
        let v = self.evaluate_points(&stencil)?;
        let p = self.output_dim();
        let mut out = Vec::with_capacity(p);
        for k in 0..p {
            let mut m = DMatrix::zeros(d, d);
            for i in 0..d {
                m[(i, i)] = (v[1 + 2 * i][k] - 2.0 * v[0][k] + v[2 + 2 * i][k]) / (h[i] * h[i]);
            }
            let mut idx = 1 + 2 * d;
            for i in 0..d {
                for j in 0..i {
                    let val = (v[idx][k] - v[idx + 1][k] - v[idx + 2][k] + v[idx + 3][k])
                        / (4.0 * h[i] * h[j]);
                    m[(i, j)] = val;
                    m[(j, i)] = val;
                    idx += 4;
                }
            }
            out.push((&m + m.transpose()) * 0.5);
        }
        Ok(out)
    }

    /// Model restricted to output `k`, sharing the backend but with a fresh counter.
    pub fn marginal(&self, k: usize) -> Result<Model> {
        if k >= self.output_dim() {
            return invalid(format!("output index {k} out of range"));
        }
        let inner = Arc::new(self.clone());
        let grad_inner = inner.clone();
        let m = Model::from_native(&self.input_names, &[&self.output_names[k]], move |x| {
            inner.call(x).map(|y| vec![y[k]]).map_err(|e| e.to_string())
        })?;
        m.with_gradient(GradientPolicy::UserSupplied(Arc::new(move |x| {
            let g = grad_inner.gradient(x).map_err(|e| e.to_string())?;
            Ok(g.rows(k, 1).into_owned())
        })))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FLOOD_H: &str = "(Q/(Ks*300.0*sqrt((Zm-Zv)/5000.0)))^0.6";
    const INPUTS: [&str; 4] = ["Q", "Ks", "Zv", "Zm"];

    fn flood() -> Model {
        Model::from_expressions(&INPUTS, &["H"], &[FLOOD_H]).unwrap()
    }

    #[test]
    fn flood_expression_value() {
        let m = flood();
        let h = m.scalar(&[1335.0, 30.0, 50.167, 55.033]).unwrap();
        // Hand evaluation: slope = 4.866/5000, H = (1335/(9000*sqrt(slope)))^0.6
        let slope: f64 = (55.033 - 50.167) / 5000.0;
        let expected = (1335.0 / (30.0 * 300.0 * slope.sqrt())).powf(0.6);
        assert!((h - expected).abs() < 1e-12);
        assert!((h - 2.553).abs() < 5e-3);
        assert_eq!(m.scalar(&[0.0, 30.0, 50.0, 55.0]).unwrap(), 0.0);
    }

    #[test]
    fn empty_batch_and_counter() {
        let m = flood();
        let out = m.evaluate(&Sample::new(4)).unwrap();
        assert!(out.is_empty());
        assert_eq!(m.evaluations(), 0);
        let pts = Sample::from_rows(&[[1000.0, 30.0, 50.0, 55.0], [2000.0, 25.0, 49.0, 54.0]]).unwrap();
        m.evaluate(&pts).unwrap();
        assert_eq!(m.evaluations(), 2);
    }

    #[test]
    fn batch_errors_carry_row_index() {
        let m = Model::from_expressions(&["x"], &["y"], &["log(x)"]).unwrap();
        let pts = Sample::from_rows(&[[1.0], [2.0], [-1.0], [-2.0]]).unwrap();
        match m.evaluate(&pts) {
            Err(Error::Evaluation { row, .. }) => assert_eq!(row, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn gradients_symbolic_and_fd_agree() {
        let m = flood();
        let x = [1335.0, 30.0, 50.167, 55.033];
        let h = m.scalar(&x).unwrap();
        let g = m.gradient(&x).unwrap();
        assert!((g[(0, 0)] - 0.6 * h / 1335.0).abs() < 1e-12);
        assert!((g[(0, 0)] - 1.147e-3).abs() < 2e-6);
        let fd = m.fd_gradient(&x, &default_gradient_steps(&x)).unwrap();
        for i in 0..4 {
            assert!((fd[(0, i)] - g[(0, i)]).abs() <= 1e-6 * g[(0, i)].abs(), "i={i}");
        }
        let oracle = m.fd_gradient(&x, &[1e-4 * 1335.0, 1e-4 * 30.0, 1e-4 * 50.167, 1e-4 * 55.033]).unwrap();
        assert!((oracle[(0, 0)] - g[(0, 0)]).abs() < 1e-9);
    }

    #[test]
    fn fd_on_simple_functions() {
        let sq = Model::from_native(&["x"], &["y"], |x| Ok(vec![x[0] * x[0]])).unwrap();
        assert!((sq.fd_gradient(&[3.0], &[1e-5]).unwrap()[(0, 0)] - 6.0).abs() < 1e-8);
        let lin = Model::from_native(&["a", "b"], &["y"], |x| Ok(vec![2.0 * x[0] - 3.0 * x[1] + 1.0])).unwrap();
        let g = lin.gradient(&[0.3, 7.0]).unwrap();
        assert!((g[(0, 0)] - 2.0).abs() < 1e-9 && (g[(0, 1)] + 3.0).abs() < 1e-9);
        let h = lin.fd_hessian(&[0.3, 7.0], &default_hessian_steps(&[0.3, 7.0])).unwrap();
        assert!(h[0].iter().all(|v| v.abs() < 1e-6));
        let prod = Model::from_native(&["a", "b"], &["y"], |x| Ok(vec![x[0] * x[1]])).unwrap();
        for x in [[0.0, 0.0], [3.0, 4.0], [-120.0, 0.5]] {
            let h = prod.fd_hessian(&x, &default_hessian_steps(&x)).unwrap();
            assert!((h[0][(0, 1)] - 1.0).abs() < 1e-6 && (h[0][(1, 0)] - 1.0).abs() < 1e-6);
            assert!(h[0][(0, 0)].abs() < 1e-6 && h[0][(1, 1)].abs() < 1e-6);
        }
    }

    #[test]
    fn flood_hessian_entry() {
        let m = flood().with_gradient(GradientPolicy::FiniteDifference(None)).unwrap();
        let x = [1335.0, 30.0, 50.167, 55.033];
        let h = m.scalar(&x).unwrap();
        let analytic = 0.6 * (0.6 - 1.0) * h / (1335.0 * 1335.0);
        let fd = m.hessian(&x).unwrap();
        assert!((fd[0][(0, 0)] - analytic).abs() < 1e-3 * analytic.abs());
        let sym = flood().hessian(&x).unwrap();
        assert!((sym[0][(0, 0)] - analytic).abs() < 1e-12 * analytic.abs().max(1.0));
    }

    #[test]
    fn symbolic_policy_rejected_for_non_expression() {
        let m = Model::from_native(&["x"], &["y"], |x| Ok(vec![x[0]])).unwrap();
        assert!(m.with_gradient(GradientPolicy::Symbolic).is_err());
        let abs = Model::from_expressions(&["x"], &["y"], &["abs(x)"]).unwrap();
        assert!(matches!(abs.gradient_policy(), GradientPolicy::FiniteDifference(None)));
    }
}
