//! Designs of experiments on the unit cube and stratified patterns.
//!
//! Stratified patterns are built around a center with levels measured relative to
//! it, one level list shared by every axis:
//!
//! * factorial: the center plus, for every level `l`, the `2^d` corners `c ± l·s`;
//! * axial: the center plus, for every level `l` and axis `i`, the points `c ± l·s_i e_i`;
//! * composite: the union of the two, the center appearing once.
//!
//! `s` is an optional per-axis scale (default one), so `levels = [1]` in two dimensions
//! gives the four corners `(±1, ±1)` and the center for the factorial pattern.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::RngStream;
use crate::sample::Sample;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Design {
    MonteCarlo { size: usize },
    Lhs { size: usize },
    Halton { size: usize },
    Faure { size: usize },
    Sobol { size: usize },
    Factorial(Pattern),
    Axial(Pattern),
    Composite(Pattern),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pattern {
    pub center: Vec<f64>,
    pub levels: Vec<f64>,
    #[serde(default)]
    pub scale: Option<Vec<f64>>,
}

impl Design {
    /// Generates the design in dimension `dim`. Stratified patterns take their
    /// dimension from the center; random designs draw from `rng`.
    pub fn generate(&self, dim: usize, rng: &mut RngStream) -> Result<Sample> {
        match self {
            Design::MonteCarlo { size } => monte_carlo(*size, dim, rng),
            Design::Lhs { size } => lhs(*size, dim, rng),
            Design::Halton { size } => halton(*size, dim),
            Design::Faure { size } => faure(*size, dim),
            Design::Sobol { size } => sobol(*size, dim),
            Design::Factorial(p) => p.factorial(),
            Design::Axial(p) => p.axial(),
            Design::Composite(p) => p.composite(),
        }
    }

    pub fn is_random(&self) -> bool {
        matches!(self, Design::MonteCarlo { .. } | Design::Lhs { .. })
    }
}

fn check(n: usize, dim: usize) -> Result<()> {
    if n == 0 || dim == 0 {
        return invalid("design size and dimension must be positive");
    }
    Ok(())
}

pub fn monte_carlo(n: usize, dim: usize, rng: &mut RngStream) -> Result<Sample> {
    check(n, dim)?;
    let data = (0..n * dim).map(|_| rng.uniform()).collect();
    Sample::from_flat(dim, data)
}

/// Latin hypercube: one point per stratum `[k/n, (k+1)/n)` in every dimension.
pub fn lhs(n: usize, dim: usize, rng: &mut RngStream) -> Result<Sample> {
    check(n, dim)?;
    let mut data = vec![0.0; n * dim];
    for j in 0..dim {
        let perm = rng.permutation(n);
        for (i, &k) in perm.iter().enumerate() {
            data[i * dim + j] = ((k as f64 + rng.uniform()) / n as f64).min(next_below((k + 1) as f64 / n as f64));
        }
    }
    Sample::from_flat(dim, data)
}

fn next_below(x: f64) -> f64 {
    f64::from_bits(x.to_bits() - 1)
}

pub fn first_primes(count: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(count);
    let mut c = 2u64;
    while primes.len() < count {
        if primes.iter().take_while(|&&p| p * p <= c).all(|&p| c % p != 0) {
            primes.push(c);
        }
        c += 1;
    }
    primes
}

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|p| p * p <= n).all(|p| n % p != 0)
}

pub fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut x = 0.0;
    while i > 0 {
        x += (i % base) as f64 * f;
        i /= base;
        f *= inv;
    }
    x
}

/// Halton sequence, index starting at 1, dimension `j` in the `j`-th prime base.
pub fn halton(n: usize, dim: usize) -> Result<Sample> {
    check(n, dim)?;
    let primes = first_primes(dim);
    let data = (1..=n as u64)
        .flat_map(|i| primes.iter().map(move |&p| radical_inverse(i, p)))
        .collect();
    Sample::from_flat(dim, data)
}

/// Faure sequence in base `q`, the smallest prime `>= dim`, index starting at 1.
/// Dimension `j` applies the generalized Pascal matrix `C(k, r) j^(k-r) mod q` to
/// the base-`q` digits of the index.
pub fn faure(n: usize, dim: usize) -> Result<Sample> {
    check(n, dim)?;
    let q = (dim.max(2) as u64..).find(|&c| is_prime(c)).expect("primes are unbounded");
    let ndigits = {
        let mut k = 1;
        let mut p = q;
        while p <= n as u64 {
            p *= q;
            k += 1;
        }
        k
    };
    // Binomial coefficients mod q.
    let mut binom = vec![vec![0u64; ndigits]; ndigits];
    for k in 0..ndigits {
        binom[k][0] = 1;
        for r in 1..=k {
            binom[k][r] = (binom[k - 1][r - 1] + if r < k { binom[k - 1][r] } else { 0 }) % q;
        }
    }
    let mut data = Vec::with_capacity(n * dim);
    let mut digits = vec![0u64; ndigits];
    for i in 1..=n as u64 {
        let mut m = i;
        for d in digits.iter_mut() {
            *d = m % q;
            m /= q;
        }
        for j in 0..dim as u64 {
            let mut x = 0.0;
            let mut f = 1.0 / q as f64;
            for r in 0..ndigits {
                let mut b = 0u64;
                let mut pw = 1u64;
                for k in r..ndigits {
                    b = (b + binom[k][r] * pw % q * digits[k]) % q;
                    pw = pw * j % q;
                }
                x += b as f64 * f;
                f /= q as f64;
            }
            data.push(x);
        }
    }
    Sample::from_flat(dim, data)
}

/// Primitive polynomials (with leading and trailing coefficients) and initial
/// direction numbers for dimensions 2..=21, from the Joe-Kuo table.
const SOBOL_TABLE: [(u32, &[u32]); 20] = [
    (3, &[1]),
    (7, &[1, 3]),
    (11, &[1, 3, 1]),
    (13, &[1, 1, 1]),
    (19, &[1, 1, 3, 3]),
    (25, &[1, 3, 5, 13]),
    (37, &[1, 1, 5, 5, 17]),
    (41, &[1, 1, 5, 5, 5]),
    (47, &[1, 1, 7, 11, 19]),
    (55, &[1, 1, 5, 1, 1]),
    (59, &[1, 1, 1, 3, 11]),
    (61, &[1, 3, 5, 5, 31]),
    (67, &[1, 3, 3, 9, 7, 49]),
    (91, &[1, 1, 1, 15, 21, 21]),
    (97, &[1, 3, 1, 13, 27, 49]),
    (103, &[1, 1, 1, 15, 7, 5]),
    (109, &[1, 3, 1, 15, 13, 25]),
    (115, &[1, 1, 5, 5, 19, 61]),
    (131, &[1, 3, 7, 11, 23, 15, 103]),
    (137, &[1, 3, 7, 13, 13, 15, 69]),
];

pub const SOBOL_MAX_DIM: usize = SOBOL_TABLE.len() + 1;
const SOBOL_BITS: usize = 32;

fn direction_numbers(j: usize) -> [u32; SOBOL_BITS] {
    let mut v = [0u32; SOBOL_BITS];
    if j == 0 {
        for (k, vk) in v.iter_mut().enumerate() {
            *vk = 1 << (SOBOL_BITS - 1 - k);
        }
        return v;
    }
    let (poly, m) = SOBOL_TABLE[j - 1];
    let s = m.len();
    let a = (poly >> 1) & ((1 << (s - 1)) - 1);
    for k in 0..s {
        v[k] = m[k] << (SOBOL_BITS - 1 - k);
    }
    for k in s..SOBOL_BITS {
        let mut x = v[k - s] ^ (v[k - s] >> s);
        for l in 1..s {
            if (a >> (s - 1 - l)) & 1 == 1 {
                x ^= v[k - l];
            }
        }
        v[k] = x;
    }
    v
}

/// Sobol' sequence in Gray-code order, index starting at 1 (the origin is skipped).
pub fn sobol(n: usize, dim: usize) -> Result<Sample> {
    check(n, dim)?;
    if dim > SOBOL_MAX_DIM {
        return Err(Error::Unsupported(format!(
            "Sobol' sequence supports dimension up to {SOBOL_MAX_DIM}, got {dim}"
        )));
    }
    if n as u64 >= 1 << SOBOL_BITS {
        return invalid("Sobol' sequence length exceeds 2^32 - 1");
    }
    let dirs: Vec<[u32; SOBOL_BITS]> = (0..dim).map(direction_numbers).collect();
    let mut state = vec![0u32; dim];
    let scale = 1.0 / (1u64 << SOBOL_BITS) as f64;
    let mut data = Vec::with_capacity(n * dim);
    for i in 0..n as u32 {
        let c = (!i).trailing_zeros() as usize;
        for (s, v) in state.iter_mut().zip(&dirs) {
            *s ^= v[c];
            data.push(*s as f64 * scale);
        }
    }
    Sample::from_flat(dim, data)
}

impl Pattern {
    fn validate(&self) -> Result<(usize, Vec<f64>)> {
        let d = self.center.len();
        if d == 0 {
            return invalid("pattern center must not be empty");
        }
        if self.levels.is_empty() {
            return invalid("pattern levels must not be empty");
        }
        let scale = self.scale.clone().unwrap_or_else(|| vec![1.0; d]);
        if scale.len() != d {
            return Err(Error::Dimension {
                expected: d,
                found: scale.len(),
            });
        }
        Ok((d, scale))
    }

    fn corners(&self, d: usize, scale: &[f64], out: &mut Vec<Vec<f64>>) {
        for &l in &self.levels {
            for mask in 0..1usize << d {
                out.push(
                    (0..d)
                        .map(|i| {
                            let sign = if mask >> i & 1 == 1 { 1.0 } else { -1.0 };
                            self.center[i] + sign * l * scale[i]
                        })
                        .collect(),
                );
            }
        }
    }

    fn axes(&self, d: usize, scale: &[f64], out: &mut Vec<Vec<f64>>) {
        for &l in &self.levels {
            for i in 0..d {
                for sign in [-1.0, 1.0] {
                    let mut p = self.center.clone();
                    p[i] += sign * l * scale[i];
                    out.push(p);
                }
            }
        }
    }

    pub fn factorial(&self) -> Result<Sample> {
        let (d, scale) = self.validate()?;
        let mut pts = vec![self.center.clone()];
        self.corners(d, &scale, &mut pts);
        Sample::from_rows(&pts)
    }

    pub fn axial(&self) -> Result<Sample> {
        let (d, scale) = self.validate()?;
        let mut pts = vec![self.center.clone()];
        self.axes(d, &scale, &mut pts);
        Sample::from_rows(&pts)
    }

    pub fn composite(&self) -> Result<Sample> {
        let (d, scale) = self.validate()?;
        let mut pts = vec![self.center.clone()];
        self.corners(d, &scale, &mut pts);
        self.axes(d, &scale, &mut pts);
        Sample::from_rows(&pts)
    }
}

/// Affine map of unit-cube points onto the box `[lower, upper]`.
pub fn scale_to_box(sample: &Sample, lower: &[f64], upper: &[f64]) -> Result<Sample> {
    let d = sample.dim();
    if lower.len() != d || upper.len() != d {
        return Err(Error::Dimension {
            expected: d,
            found: lower.len().min(upper.len()),
        });
    }
    let data = sample
        .rows()
        .flat_map(|r| (0..d).map(move |j| lower[j] + r[j] * (upper[j] - lower[j])))
        .collect();
    Sample::from_flat(d, data)?.set_labels(sample.labels().to_vec())
}

/// L2 star discrepancy by Warnock's closed form.
pub fn l2_star_discrepancy(sample: &Sample) -> Result<f64> {
    let n = sample.len();
    if n == 0 {
        return invalid("discrepancy of an empty sample");
    }
    let d = sample.dim() as i32;
    let rows: Vec<&[f64]> = sample.rows().collect();
    let t1 = 3f64.powi(-d);
    let t2: f64 = rows
        .iter()
        .map(|r| r.iter().map(|x| (1.0 - x * x) / 2.0).product::<f64>())
        .sum::<f64>()
        * 2.0
        / n as f64;
    let mut t3 = 0.0;
    for a in &rows {
        for b in &rows {
            t3 += a.iter().zip(b.iter()).map(|(x, y)| 1.0 - x.max(*y)).product::<f64>();
        }
    }
    t3 /= (n * n) as f64;
    Ok((t1 - t2 + t3).max(0.0).sqrt())
}
