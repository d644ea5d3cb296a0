//! The flood-dyke benchmark: river height `H` and flood level `Z_c = Z_v + H` as
//! functions of the flowrate `Q`, the Strickler coefficient `Ks` and the downstream
//! and upstream river bed levels `Zv`, `Zm`.

use crate::dist::Univariate;
use crate::error::Result;
use crate::joint::{Copula, JointDistribution};
use crate::model::Model;
use crate::transform::Event;

pub const INPUTS: [&str; 4] = ["Q", "Ks", "Zv", "Zm"];
pub const OUTPUTS: [&str; 2] = ["H", "Zc"];
pub const LENGTH: f64 = 5000.0;
pub const WIDTH: f64 = 300.0;
/// Dyke crest used for the failure event `Zc > 58`.
pub const THRESHOLD: f64 = 58.0;
/// Index of `H` in the model outputs.
pub const HEIGHT: usize = 0;
/// Index of `Zc` in the model outputs.
pub const LEVEL: usize = 1;
pub const BED_CORRELATION: f64 = 0.7;

pub const HEIGHT_FORMULA: &str = "(Q/(Ks*300.0*sqrt((Zm-Zv)/5000.0)))^0.6";

/// Two-output expression model `(H, Zc)`.
pub fn model() -> Result<Model> {
    let level = format!("Zv + {HEIGHT_FORMULA}");
    Model::from_expressions(&INPUTS, &OUTPUTS, &[HEIGHT_FORMULA, level.as_str()])
}

pub fn margins() -> Result<Vec<Univariate>> {
    Ok(vec![
        Univariate::gumbel(1.8e-3, 1014.0)?.truncate(Some(0.0), None)?,
        Univariate::normal(30.0, 7.5)?.truncate(Some(0.0), None)?,
        Univariate::triangular(47.6, 50.5, 52.4)?,
        Univariate::triangular(52.5, 54.9, 57.7)?,
    ])
}

/// Inputs with `(Q, Ks)` independent and a normal copula of correlation 0.7 on `(Zv, Zm)`.
pub fn joint() -> Result<JointDistribution> {
    let copula = Copula::composed(vec![Copula::independent(2)?, Copula::normal2(BED_CORRELATION)?])?;
    JointDistribution::new(margins()?, copula)?.with_labels(INPUTS)
}

pub fn independent_joint() -> Result<JointDistribution> {
    JointDistribution::independent(margins()?)?.with_labels(INPUTS)
}

/// Overflow event `Zc > 58`.
pub fn event() -> Event {
    Event {
        output: LEVEL,
        ..Event::greater(THRESHOLD)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_is_bed_plus_height() {
        let m = model().unwrap();
        let y = m.call(&[1335.0, 30.0, 50.167, 55.033]).unwrap();
        assert!((y[LEVEL] - y[HEIGHT] - 50.167).abs() < 1e-12);
        let j = joint().unwrap();
        assert_eq!(j.labels(), &INPUTS.map(String::from));
        assert!((j.margin(2).mean() - 50.166_666_666_666_664).abs() < 1e-12);
    }
}
