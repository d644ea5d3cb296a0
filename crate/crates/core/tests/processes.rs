use std::sync::Arc;

use uq_core::dist::Univariate;
use uq_core::estimation::ks_statistic;
use uq_core::joint::{Copula, JointDistribution};
use uq_core::process::*;
use uq_core::RngStream;
use uq_expr::parse;

fn mesh(n: usize) -> Arc<Mesh> {
    Arc::new(Mesh::regular(0.0, 1.0, n).unwrap())
}

#[test]
fn white_noise_has_no_lag_one_correlation() {
    let law = JointDistribution::independent(vec![Univariate::standard_normal()]).unwrap();
    let x = white_noise(&law, mesh(100_000), &mut RngStream::new(1)).component(0);
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let lag1 = x.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum::<f64>() / (n * var);
    assert!(lag1.abs() < 0.013, "{lag1}");
}

#[test]
fn bivariate_white_noise_components_pass_ks() {
    let n01 = Univariate::standard_normal();
    let law = JointDistribution::new(vec![n01.clone(), n01.clone()], Copula::normal2(0.5).unwrap()).unwrap();
    let f = white_noise(&law, mesh(20_000), &mut RngStream::new(2));
    for j in 0..2 {
        let d = ks_statistic(&f.component(j), |v| n01.cdf(v));
        assert!(d < 1.63 / (20_000f64).sqrt(), "{d}");
    }
    let dirac = JointDistribution::independent(vec![Univariate::dirac(3.0).unwrap()]).unwrap();
    assert!(white_noise(&dirac, mesh(10), &mut RngStream::new(0)).component(0).iter().all(|&v| v == 3.0));
}

#[test]
fn random_walk_variance_grows_linearly() {
    let step = JointDistribution::independent(vec![Univariate::standard_normal()]).unwrap();
    let k = 100;
    let reps = 10_000;
    let mut rng = RngStream::new(3);
    let finals: Vec<f64> = (0..reps)
        .map(|_| random_walk(&[1.5], &step, mesh(k + 1), &mut rng).unwrap().value(k)[0])
        .collect();
    let mean = finals.iter().sum::<f64>() / reps as f64;
    let var = finals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
    assert!((var / k as f64 - 1.0).abs() < 0.1, "{var}");
    let law = Univariate::normal(1.5, (k as f64).sqrt()).unwrap();
    let d = ks_statistic(&finals, |v| law.cdf(v));
    assert!(d < 1.63 / (reps as f64).sqrt(), "{d}");
}

#[test]
fn functional_basis_variance_is_a_quadratic_form() {
    let basis = vec![parse("1", &["t"]).unwrap(), parse("t", &["t"]).unwrap(), parse("sin(t)", &["t"]).unwrap()];
    let n01 = Univariate::standard_normal();
    let coeffs = JointDistribution::new(
        vec![Univariate::normal(0.0, 1.0).unwrap(), Univariate::normal(1.0, 0.5).unwrap(), n01],
        Copula::composed(vec![Copula::normal2(0.6).unwrap(), Copula::independent(1).unwrap()]).unwrap(),
    )
    .unwrap();
    let cov = coeffs.covariance();
    let process = FunctionalBasisProcess::new(coeffs, basis).unwrap();
    let m = Arc::new(Mesh::regular(0.0, 0.5, 7).unwrap());
    let reps = 10_000;
    let mut rng = RngStream::new(4);
    let fields: Vec<Vec<f64>> = (0..reps)
        .map(|_| process.realization(m.clone(), &mut rng).unwrap().component(0))
        .collect();
    for (k, &t) in m.vertices().iter().enumerate() {
        let phi = [1.0, t, t.sin()];
        let mut expected = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                expected += phi[i] * cov[(i, j)] * phi[j];
            }
        }
        let col: Vec<f64> = fields.iter().map(|f| f[k]).collect();
        let mean = col.iter().sum::<f64>() / reps as f64;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
        assert!((var / expected - 1.0).abs() < 0.1, "t = {t}: {var} vs {expected}");
    }
}

#[test]
fn constant_basis_gives_flat_standard_normal_fields() {
    let coeffs = JointDistribution::independent(vec![Univariate::standard_normal()]).unwrap();
    let process = FunctionalBasisProcess::new(coeffs, vec![parse("1", &["t"]).unwrap()]).unwrap();
    let mut rng = RngStream::new(5);
    let mut firsts = Vec::new();
    for _ in 0..5000 {
        let f = process.realization(mesh(5), &mut rng).unwrap().component(0);
        assert!(f.iter().all(|&v| v == f[0]));
        firsts.push(f[0]);
    }
    let n01 = Univariate::standard_normal();
    assert!(ks_statistic(&firsts, |v| n01.cdf(v)) < 1.63 / (5000f64).sqrt());
    let fixed = process.evaluate(&[2.0], mesh(3)).unwrap();
    assert_eq!(fixed.component(0), vec![2.0; 3]);
}

#[test]
fn pointwise_maps_transform_fields() {
    let law = JointDistribution::independent(vec![Univariate::normal(5.0, 1.0).unwrap()]).unwrap();
    let f = white_noise(&law, mesh(50_000), &mut RngStream::new(6));
    let same = f.map(|_, v| v.to_vec()).unwrap();
    assert_eq!(same.component(0), f.component(0));
    let shifted = f.map(|_, v| vec![v[0] - 1.0]).unwrap();
    let mean = |x: Vec<f64>| x.iter().sum::<f64>() / x.len() as f64;
    assert!((mean(shifted.component(0)) - mean(f.component(0)) + 1.0).abs() < 1e-9);
}
