use std::collections::HashSet;

use proptest::prelude::*;
use uq_core::design::*;
use uq_core::RngStream;

#[test]
fn halton_beats_monte_carlo_discrepancy() {
    let halton = l2_star_discrepancy(&halton(1000, 2).unwrap()).unwrap();
    let mut mc: Vec<f64> = (0..20)
        .map(|s| l2_star_discrepancy(&monte_carlo(1000, 2, &mut RngStream::new(s)).unwrap()).unwrap())
        .collect();
    mc.sort_by(f64::total_cmp);
    let median = 0.5 * (mc[9] + mc[10]);
    assert!(halton < median, "{halton} vs {median}");
}

#[test]
fn factorial_pattern_is_center_plus_corners() {
    let p = Pattern {
        center: vec![0.0, 0.0],
        levels: vec![1.0],
        scale: None,
    };
    let got: HashSet<(i64, i64)> = Design::Factorial(p)
        .generate(2, &mut RngStream::new(0))
        .unwrap()
        .rows()
        .map(|r| (r[0] as i64, r[1] as i64))
        .collect();
    let want: HashSet<(i64, i64)> = [(0, 0), (-1, -1), (1, -1), (-1, 1), (1, 1)].into_iter().collect();
    assert_eq!(got, want);
}

#[test]
fn low_discrepancy_points_are_distinct() {
    for s in [halton(1 << 16, 3).unwrap(), sobol(1 << 16, 3).unwrap(), faure(1 << 16, 3).unwrap()] {
        let set: HashSet<Vec<u64>> = s.rows().map(|r| r.iter().map(|v| v.to_bits()).collect()).collect();
        assert_eq!(set.len(), 1 << 16);
    }
}

fn kinds(size: usize) -> Vec<Design> {
    vec![
        Design::MonteCarlo { size },
        Design::Lhs { size },
        Design::Halton { size },
        Design::Faure { size },
        Design::Sobol { size },
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn designs_stay_in_the_unit_cube_and_are_reproducible(n in 1usize..300, d in 1usize..8, seed in any::<u64>()) {
        for design in kinds(n) {
            let a = design.generate(d, &mut RngStream::new(seed)).unwrap();
            let b = design.generate(d, &mut RngStream::new(seed)).unwrap();
            prop_assert_eq!(a.as_flat(), b.as_flat());
            prop_assert_eq!(a.len(), n);
            prop_assert!(a.as_flat().iter().all(|v| (0.0..=1.0).contains(v)));
            if !design.is_random() {
                let c = design.generate(d, &mut RngStream::new(seed ^ 1)).unwrap();
                prop_assert_eq!(a.as_flat(), c.as_flat());
            }
        }
    }

    #[test]
    fn lhs_has_one_point_per_stratum(n in 1usize..200, d in 1usize..6, seed in any::<u64>()) {
        let s = lhs(n, d, &mut RngStream::new(seed)).unwrap();
        for j in 0..d {
            let mut hit = vec![false; n];
            for v in s.column(j) {
                hit[((v * n as f64) as usize).min(n - 1)] = true;
            }
            prop_assert!(hit.iter().all(|&h| h));
        }
    }

    #[test]
    fn stratified_patterns_are_symmetric(center in prop::collection::vec(-5.0..5.0f64, 1..5), level in 0.1..3.0f64) {
        let p = Pattern { center: center.clone(), levels: vec![level], scale: None };
        let s = p.composite().unwrap();
        for r in s.rows() {
            let mirror: Vec<f64> = r.iter().zip(&center).map(|(x, c)| 2.0 * c - x).collect();
            prop_assert!(s.rows().any(|q| q.iter().zip(&mirror).all(|(a, b)| (a - b).abs() < 1e-12)));
        }
    }
}
