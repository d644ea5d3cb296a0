use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Enumeration {
    /// Total degree, then lexicographic with larger leading components first.
    Linear,
    /// Increasing `q`-quasi-norm `(Σ k_i^q)^(1/q)`, ties in linear order.
    Hyperbolic { q: f64 },
}

/// All multi-indices of total degree `degree`, in decreasing lexicographic order.
fn stratum(d: usize, degree: usize) -> Vec<Vec<usize>> {
    if d == 1 {
        return vec![vec![degree]];
    }
    let mut out = Vec::new();
    for first in (0..=degree).rev() {
        for mut tail in stratum(d - 1, degree - first) {
            tail.insert(0, first);
            out.push(tail);
        }
    }
    out
}

fn quasi_norm(k: &[usize], q: f64) -> f64 {
    k.iter().map(|&v| (v as f64).powf(q)).sum::<f64>().powf(1.0 / q)
}

/// Number of multi-indices of total degree at most `degree` in dimension `d`.
pub fn cumulated_cardinal(d: usize, degree: usize) -> usize {
    // C(d + degree, degree)
    let mut c = 1usize;
    for i in 1..=degree {
        c = c * (d + i) / i;
    }
    c
}

/// First `count` multi-indices of the enumeration. The zero index is always first.
pub fn enumerate_multi_indices(strategy: Enumeration, d: usize, count: usize) -> Result<Vec<Vec<usize>>> {
    if d == 0 {
        return invalid("enumeration dimension must be positive");
    }
    match strategy {
        Enumeration::Linear => {
            let mut out = Vec::with_capacity(count);
            let mut degree = 0;
            while out.len() < count {
                for k in stratum(d, degree) {
                    if out.len() == count {
                        break;
                    }
                    out.push(k);
                }
                degree += 1;
            }
            Ok(out)
        }
        Enumeration::Hyperbolic { q } => {
            if !(q > 0.0 && q <= 1.0) {
                return invalid("hyperbolic q must lie in (0, 1]");
            }
            // For q <= 1 the quasi-norm dominates the total degree, so every index with
            // norm <= D appears among the strata 0..=D.
            let mut degree = 0;
            loop {
                let mut candidates: Vec<(f64, Vec<usize>)> = (0..=degree)
                    .flat_map(|g| stratum(d, g))
                    .map(|k| (quasi_norm(&k, q), k))
                    .filter(|(n, _)| *n <= degree as f64 + 1e-9)
                    .collect();
                if candidates.len() >= count {
                    // Stable sort keeps the linear order among equal norms.
                    candidates.sort_by_key(|(n, _)| (n * 1e9).round() as i64);
                    return Ok(candidates.into_iter().take(count).map(|(_, k)| k).collect());
                }
                degree += 1;
            }
        }
    }
}
