//! Input ranking: correlation-based indices, pick-freeze Sobol' indices and plot data.

mod correlation;
mod plots;
mod sobol;

pub use correlation::{
    linear_regression, pearson, pearson_coefficient, spearman, spearman_coefficient, src, srrc, LinearRegression,
};
pub use plots::{cobweb_data, scatter_matrix_data, Cobweb, ScatterMatrix};
pub use sobol::{sobol_pickfreeze, SobolIndices};

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityResult {
    pub kind: String,
    pub labels: Vec<String>,
    pub values: Vec<f64>,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regression: Option<LinearRegression>,
}

impl SensitivityResult {
    fn new(kind: &str, labels: Vec<String>, values: Vec<f64>, n: usize) -> Self {
        SensitivityResult {
            kind: kind.to_owned(),
            labels,
            values,
            n,
            regression: None,
        }
    }

    fn with_regression(mut self, reg: LinearRegression) -> Self {
        self.regression = Some(reg);
        self
    }

    pub fn r2(&self) -> Option<f64> {
        self.regression.as_ref().map(|r| r.r2)
    }

    /// Input indices sorted by decreasing absolute value.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.values.len()).collect();
        idx.sort_by(|&a, &b| self.values[b].abs().total_cmp(&self.values[a].abs()));
        idx
    }
}
