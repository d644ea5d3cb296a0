use crate::error::{invalid, Result};
use crate::model::Model;
use crate::sample::Sample;
use crate::sensitivity::linear_regression;

/// Order-1 or order-2 Taylor expansion of every output around `point`.
pub fn taylor_surrogate(model: &Model, point: &[f64], order: usize) -> Result<Model> {
    if !(1..=2).contains(&order) {
        return invalid("Taylor surrogate order must be 1 or 2");
    }
    let y0 = model.call(point)?;
    let grad = model.gradient(point)?;
    let hess = if order == 2 { Some(model.hessian(point)?) } else { None };
    let x0 = point.to_vec();
    let d = x0.len();
    Model::from_native(model.input_names(), model.output_names(), move |x| {
        let h: Vec<f64> = x.iter().zip(&x0).map(|(a, b)| a - b).collect();
        Ok((0..y0.len())
            .map(|o| {
                let mut v = y0[o] + (0..d).map(|i| grad[(o, i)] * h[i]).sum::<f64>();
                if let Some(hs) = &hess {
                    for i in 0..d {
                        for j in 0..d {
                            v += 0.5 * hs[o][(i, j)] * h[i] * h[j];
                        }
                    }
                }
                v
            })
            .collect())
    })
}

/// The least-squares regression of `y` on `x` wrapped as a model.
pub fn linear_least_squares_surrogate(x: &Sample, y: &[f64], output: &str) -> Result<Model> {
    let reg = linear_regression(x, y)?;
    Model::from_native(x.labels(), &[output], move |v| Ok(vec![reg.predict(v)]))
}
