use proptest::prelude::*;
use uq_core::dist::Univariate;
use uq_core::estimation::{kernel_smooth, ks_statistic};
use uq_core::flood;
use uq_core::joint::{fit_normal_copula, Copula, ConditionalVector, JointDistribution, LinearCombination, ParameterLaw, RandomSum};
use uq_core::numeric::integrate;
use uq_core::sample::ranks;
use uq_core::{Model, RngStream, Sample};

fn family() -> impl Strategy<Value = Univariate> {
    prop_oneof![
        (-100.0..100.0f64, 0.1..50.0f64).prop_map(|(m, s)| Univariate::normal(m, s).unwrap()),
        (-100.0..100.0f64, 0.1..50.0f64).prop_map(|(a, w)| Univariate::uniform(a, a + w).unwrap()),
        (-100.0..100.0f64, 0.1..50.0f64, 0.0..1.0f64)
            .prop_map(|(a, w, f)| Univariate::triangular(a, a + f * w, a + w).unwrap()),
        (1e-3..5.0f64, -100.0..2000.0f64).prop_map(|(al, be)| Univariate::gumbel(al, be).unwrap()),
        (1.0..5.0f64, 1.0..5.0f64, -10.0..10.0f64, 0.5..20.0f64)
            .prop_map(|(r, s, a, w)| Univariate::beta(r, r + s, a, a + w).unwrap()),
        (0.1..10.0f64, -10.0..10.0f64).prop_map(|(l, g)| Univariate::exponential(l, g).unwrap()),
        (1.0..10.0f64, 0.1..5.0f64, -10.0..10.0f64).prop_map(|(k, l, g)| Univariate::gamma(k, l, g).unwrap()),
        (0.0..40.0f64, 1.0..10.0f64)
            .prop_map(|(m, s)| Univariate::normal(m, s).unwrap().truncate(Some(0.0), None).unwrap()),
    ]
}

const LEVELS: [f64; 9] = [1e-6, 1e-3, 0.05, 0.25, 0.5, 0.75, 0.95, 1.0 - 1e-3, 1.0 - 1e-6];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn cdf_inverts_quantile(dist in family()) {
        for p in LEVELS {
            let x = dist.quantile(p);
            prop_assert!((dist.cdf(x) - p).abs() <= 1e-10, "{dist}: p {p} x {x} cdf {}", dist.cdf(x));
        }
    }

    #[test]
    fn quantile_inverts_cdf_inside_support(dist in family(), p in 0.01..0.99f64) {
        let x = dist.quantile(p);
        let back = dist.quantile(dist.cdf(x));
        prop_assert!((back - x).abs() <= 1e-8 * x.abs().max(dist.std()), "{dist}: {x} vs {back}");
    }

    #[test]
    fn pdf_is_derivative_of_cdf(dist in family(), p in 0.02..0.98f64) {
        let x = dist.quantile(p);
        let h = 1e-4 * dist.std();
        let fd = (dist.cdf(x + h) - dist.cdf(x - h)) / (2.0 * h);
        let scale = 1.0 / dist.std();
        prop_assert!((dist.pdf(x) - fd).abs() <= 1e-6 * scale.max(dist.pdf(x)), "{dist}: pdf {} fd {fd}", dist.pdf(x));
    }

    #[test]
    fn pdf_integrates_to_one(dist in family()) {
        // Infinite ends are clipped at the 1e-12 quantiles; the missing mass is below the tolerance.
        let (lo, hi) = dist.support();
        let lo = if lo.is_finite() { lo } else { dist.quantile(1e-12) };
        let hi = if hi.is_finite() { hi } else { dist.quantile(1.0 - 1e-12) };
        let mut cuts = vec![lo, dist.quantile(0.25), dist.quantile(0.5), dist.quantile(0.75), hi];
        // The triangular density has a kink at its mode.
        if let Univariate::Triangular { m, .. } = dist {
            cuts.push(m);
            cuts.sort_by(f64::total_cmp);
        }
        let total: f64 = cuts.windows(2).map(|w| integrate(|x| dist.pdf(x), w[0], w[1], 1e-12).value).sum();
        prop_assert!((total - 1.0).abs() <= 1e-8, "{dist}: {total}");
    }
}

fn ks_band_holds(dist: &Univariate, seed: u64) -> (f64, f64) {
    let n = 100_000;
    let x = dist.sample(n, &mut RngStream::new(seed));
    (ks_statistic(&x, |v| dist.cdf(v)), 1.63 / (n as f64).sqrt())
}

#[test]
fn every_family_samples_inside_the_ks_band() {
    let laws = vec![
        Univariate::normal(30.0, 7.5).unwrap(),
        Univariate::uniform(-1.0, 3.0).unwrap(),
        Univariate::triangular(47.6, 50.5, 52.4).unwrap(),
        Univariate::gumbel(1.8e-3, 1014.0).unwrap(),
        Univariate::beta(0.5, 1.7, 0.0, 2.0).unwrap(),
        Univariate::exponential(4.0, 1.0).unwrap(),
        Univariate::gamma(0.7, 2.0, -1.0).unwrap(),
        Univariate::normal(30.0, 7.5).unwrap().truncate(Some(0.0), None).unwrap(),
        Univariate::mixture(
            vec![Univariate::normal(0.0, 1.0).unwrap(), Univariate::normal(4.0, 1.0).unwrap()],
            vec![0.3, 0.7],
        )
        .unwrap(),
        Univariate::composite("x^3", "x", Univariate::uniform(-1.0, 1.0).unwrap()).unwrap(),
        Univariate::composite("exp(x)", "x", Univariate::standard_normal()).unwrap(),
    ];
    for (i, law) in laws.iter().enumerate() {
        let (d, band) = ks_band_holds(law, 1000 + i as u64);
        assert!(d < band, "{law}: KS distance {d} vs band {band}");
    }
}

#[test]
fn cubic_pushforward_matches_large_sample() {
    let law = Univariate::composite("x^3", "x", Univariate::uniform(-1.0, 1.0).unwrap()).unwrap();
    let x = law.sample(1_000_000, &mut RngStream::new(11));
    assert!(ks_statistic(&x, |v| law.cdf(v)) < 0.002);
}

#[test]
fn normal_sample_mean_is_within_clt_bound() {
    let x = Univariate::normal(30.0, 7.5).unwrap().sample(1_000_000, &mut RngStream::new(5));
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    assert!((mean - 30.0).abs() < 0.03, "{mean}");
}

#[test]
fn mixture_component_frequencies_match_weights() {
    let law = Univariate::mixture(
        vec![Univariate::uniform(0.0, 1.0).unwrap(), Univariate::uniform(1.0, 2.0).unwrap()],
        vec![3.0, 7.0],
    )
    .unwrap();
    let n = 200_000;
    let x = law.sample(n, &mut RngStream::new(8));
    let freq = x.iter().filter(|&&v| v < 1.0).count() as f64 / n as f64;
    assert!((freq - 0.3).abs() < 4.0 * (0.21 / n as f64).sqrt(), "{freq}");
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    Sample::from_columns(&[a.to_vec(), b.to_vec()]).unwrap().correlation()[(0, 1)]
}

#[test]
fn independent_uniforms_are_uncorrelated() {
    let u = Univariate::uniform(0.0, 1.0).unwrap();
    let j = JointDistribution::independent(vec![u.clone(), u]).unwrap();
    let s = j.sample(100_000, &mut RngStream::new(21));
    assert!(pearson(&s.column(0), &s.column(1)).abs() < 0.013);
}

#[test]
fn normal_copula_with_normal_margins_is_bivariate_normal() {
    let n = Univariate::standard_normal();
    let j = JointDistribution::new(vec![n.clone(), n], Copula::normal2(0.7).unwrap()).unwrap();
    let s = j.sample(100_000, &mut RngStream::new(22));
    assert!((pearson(&s.column(0), &s.column(1)) - 0.7).abs() < 0.01);
}

#[test]
fn flood_joint_dependence_structure() {
    let j = flood::joint().unwrap();
    let s = j.sample(100_000, &mut RngStream::new(23));
    let r = |a: usize, b: usize| pearson(&ranks(&s.column(a)), &ranks(&s.column(b)));
    assert!(r(0, 1).abs() < 0.013);
    // Spearman rho of a normal copula: (6 / pi) asin(rho / 2).
    let expected = 6.0 / std::f64::consts::PI * (0.35f64).asin();
    assert!((r(2, 3) - expected).abs() < 0.013, "{}", r(2, 3));
    assert!(r(0, 2).abs() < 0.013 && r(1, 3).abs() < 0.013);
}

#[test]
fn normal_copula_cdf_at_the_median() {
    let u = Univariate::uniform(0.0, 1.0).unwrap();
    let j = JointDistribution::new(vec![u.clone(), u], Copula::normal2(0.7).unwrap()).unwrap();
    assert!((j.cdf(&[0.5, 0.5]).unwrap() - 0.3734).abs() < 1e-4);
    let (_, hi) = j.support();
    assert!((j.cdf(&hi).unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn fitted_normal_copula_recovers_correlation() {
    let u = Univariate::uniform(0.0, 1.0).unwrap();
    let indep = JointDistribution::independent(vec![u.clone(), u.clone(), u.clone()]).unwrap();
    let r = fit_normal_copula(&indep.sample(10_000, &mut RngStream::new(31)))
        .unwrap()
        .normal_correlation();
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        assert!(r[(i, j)].abs() < 0.02, "{r}");
    }
    let dep = JointDistribution::new(vec![u.clone(), u], Copula::normal2(0.7).unwrap()).unwrap();
    let r = fit_normal_copula(&dep.sample(10_000, &mut RngStream::new(32)))
        .unwrap()
        .normal_correlation();
    assert!((r[(0, 1)] - 0.7).abs() < 0.02, "{r}");
}

#[test]
fn normal_with_random_parameters_has_mean_one_half() {
    let law = JointDistribution::independent(vec![
        Univariate::uniform(0.0, 1.0).unwrap(),
        Univariate::exponential(4.0, 0.0).unwrap(),
    ])
    .unwrap();
    let x = ConditionalVector::new("Normal", ParameterLaw::Direct(law))
        .unwrap()
        .sample(1_000_000, &mut RngStream::new(41))
        .unwrap();
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    assert!((mean - 0.5).abs() < 0.004, "{mean}");
}

fn linked_uniform() -> ConditionalVector {
    let y = JointDistribution::independent(vec![Univariate::uniform(-1.0, 1.0).unwrap()]).unwrap();
    let link = Model::from_expressions(&["y"], &["a", "b"], &["y", "1 + y^2"]).unwrap();
    ConditionalVector::new("Uniform", ParameterLaw::Linked { law: y, link }).unwrap()
}

#[test]
fn linked_uniform_support_and_density() {
    let law = linked_uniform();
    let x = law.sample(1_000_000, &mut RngStream::new(42)).unwrap();
    assert!(x.iter().all(|&v| v > -1.0 && v < 2.0));
    let kde = kernel_smooth(&x, Some(-1.0), Some(2.0)).unwrap();
    let pdf = law.pdf(0.5).unwrap();
    assert!((pdf - kde.pdf(0.5)).abs() < 0.02, "{pdf} vs {}", kde.pdf(0.5));
}

#[test]
fn compound_laws_match_closed_moments() {
    let sum = RandomSum::new(Univariate::exponential(1.0, 0.0).unwrap(), 3.0).unwrap();
    let x = sum.sample(1_000_000, &mut RngStream::new(51));
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    assert!((mean - 3.0).abs() < 0.01, "{mean}");

    let n = Univariate::standard_normal();
    let lc = LinearCombination::new(0.0, vec![2.0, 3.0], vec![n.clone(), n]).unwrap();
    let x = lc.sample(200_000, &mut RngStream::new(52));
    let m = x.iter().sum::<f64>() / x.len() as f64;
    let var = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64;
    assert!((var - 13.0).abs() < 0.2, "{var}");
}
