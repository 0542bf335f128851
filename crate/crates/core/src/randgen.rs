//! Seeded samplers for Gaussian, structured and finite-set matrices.
//!
//! Every object is built from a [`Seed`]: a master value plus a stream id.
//! Trials use the trial index as the stream; independent pieces of one
//! trial (the blocks of a test matrix, the two multipliers) use
//! [`Seed::substream`]. The generator is xoshiro256++ and normals come from
//! the polar Box–Muller method.

use std::collections::BTreeSet;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::dense::{householder_qr, RealMatrix};
use crate::error::{Error, Result};
use crate::transforms::{CirculantOperator, StructureKind, ToeplitzOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed {
    pub master: u64,
    pub stream: u64,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Seed {
    pub fn new(master: u64) -> Self {
        Self { master, stream: 0 }
    }

    pub fn with_stream(self, stream: u64) -> Self {
        Self { stream, ..self }
    }

    /// A child seed that depends on both fields of `self` and on `tag`.
    pub fn substream(self, tag: u64) -> Self {
        Self { master: splitmix(self.master ^ splitmix(self.stream)), stream: tag }
    }

    fn mixed(self) -> u64 {
        splitmix(self.master) ^ splitmix(self.stream.wrapping_add(0x632B_E59B_D9B4_E019))
    }

    pub fn sampler(self) -> Sampler {
        Sampler::new(self)
    }
}

impl FromStr for Seed {
    type Err = Error;

    /// Decimal or `0x`-prefixed hex master value.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
            Some(hex) => u64::from_str_radix(hex, 16),
            None => s.parse::<u64>(),
        };
        parsed.map(Seed::new).map_err(|e| Error::Parse(format!("seed {s:?}: {e}")))
    }
}

impl std::fmt::Display for Seed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#x}/{}", self.master, self.stream)
    }
}

/// A single-threaded stream of uniform and normal draws.
#[derive(Debug, Clone)]
pub struct Sampler {
    rng: Xoshiro256PlusPlus,
    spare: Option<f64>,
    normals: u64,
}

impl Sampler {
    pub fn new(seed: Seed) -> Self {
        Self { rng: Xoshiro256PlusPlus::seed_from_u64(seed.mixed()), spare: None, normals: 0 }
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.normals += 1;
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u: f64 = self.rng.gen::<f64>() * 2.0 - 1.0;
            let v: f64 = self.rng.gen::<f64>() * 2.0 - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let k = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * k);
                return u * k;
            }
        }
    }

    pub fn normals(&mut self, len: usize) -> Vec<f64> {
        (0..len).map(|_| self.standard_normal()).collect()
    }

    /// Uniform index in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    /// Number of normal variates handed out so far.
    pub fn normals_drawn(&self) -> u64 {
        self.normals
    }
}

/// The finite set `Δ` of integers that entries are drawn from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteSet {
    values: Vec<i64>,
}

impl FiniteSet {
    pub fn new(values: Vec<i64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("finite set is empty".into()));
        }
        let distinct: BTreeSet<i64> = values.iter().copied().collect();
        if distinct.len() != values.len() {
            return Err(Error::InvalidArgument("finite set has repeated values".into()));
        }
        Ok(Self { values: distinct.into_iter().collect() })
    }

    /// `{lo, lo + 1, ..., hi}`.
    pub fn range(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidArgument(format!("empty range {lo}..={hi}")));
        }
        Ok(Self { values: (lo..=hi).collect() })
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn cardinality(&self) -> usize {
        self.values.len()
    }

    pub fn max_abs(&self) -> i64 {
        self.values.iter().map(|v| v.abs()).max().unwrap_or(0)
    }

    pub fn sample(&self, s: &mut Sampler) -> i64 {
        self.values[s.index(self.values.len())]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    Dense,
    Toeplitz,
}

fn check_dims(m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(Error::Shape(format!("empty {m}x{n} request")));
    }
    Ok(())
}

pub fn gaussian_matrix(seed: Seed, m: usize, n: usize) -> Result<RealMatrix> {
    check_dims(m, n)?;
    let mut s = seed.sampler();
    RealMatrix::new(m, n, s.normals(m * n))
}

pub fn gaussian_vector(seed: Seed, n: usize) -> Vec<f64> {
    seed.sampler().normals(n)
}

/// Circulant with i.i.d. standard normal first column.
pub fn gaussian_circulant(seed: Seed, n: usize) -> Result<CirculantOperator> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    CirculantOperator::new(seed.sampler().normals(n))
}

/// `m + n - 1` normal coefficients: the first column, then the first row
/// past its shared corner.
pub fn gaussian_toeplitz(seed: Seed, m: usize, n: usize, kind: StructureKind) -> Result<ToeplitzOperator> {
    check_dims(m, n)?;
    let coeffs = seed.sampler().normals(m + n - 1);
    toeplitz_from_coefficients(&coeffs, m, n, kind)
}

fn toeplitz_from_coefficients(coeffs: &[f64], m: usize, n: usize, kind: StructureKind) -> Result<ToeplitzOperator> {
    let col = coeffs[..m].to_vec();
    let mut row = Vec::with_capacity(n);
    row.push(col[0]);
    row.extend_from_slice(&coeffs[m..]);
    ToeplitzOperator::new(col, row, kind)
}

/// `Q` of the QR factorisation of a Gaussian `k x k` matrix, with `R`
/// normalised to a nonnegative diagonal.
pub fn random_orthonormal(seed: Seed, k: usize) -> Result<RealMatrix> {
    let g = gaussian_matrix(seed, k, k)?;
    Ok(householder_qr(&g)?.q_factor)
}

/// Integer entries drawn uniformly from `delta`; for the Toeplitz kind only
/// the `m + n - 1` generating coefficients are drawn.
pub fn finite_set_integers(seed: Seed, m: usize, n: usize, delta: &FiniteSet, kind: MatrixKind) -> Result<Vec<Vec<i64>>> {
    check_dims(m, n)?;
    let mut s = seed.sampler();
    Ok(match kind {
        MatrixKind::Dense => (0..m).map(|_| (0..n).map(|_| delta.sample(&mut s)).collect()).collect(),
        MatrixKind::Toeplitz => {
            let c: Vec<i64> = (0..m + n - 1).map(|_| delta.sample(&mut s)).collect();
            // c[0..m] is the first column, c[m..] the first row past the corner
            (0..m)
                .map(|i| (0..n).map(|j| if i >= j { c[i - j] } else { c[m + j - i - 1] }).collect())
                .collect()
        }
    })
}

pub fn finite_set_matrix(seed: Seed, m: usize, n: usize, delta: &FiniteSet, kind: MatrixKind) -> Result<RealMatrix> {
    let rows = finite_set_integers(seed, m, n, delta, kind)?;
    Ok(RealMatrix::from_fn(m, n, |i, j| rows[i][j] as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::singular_values;

    #[test]
    fn same_seed_same_matrix() {
        let s = Seed::new(42).with_stream(3);
        assert_eq!(gaussian_matrix(s, 5, 4).unwrap(), gaussian_matrix(s, 5, 4).unwrap());
        assert_ne!(gaussian_matrix(s, 5, 4).unwrap(), gaussian_matrix(s.with_stream(4), 5, 4).unwrap());
        assert_ne!(s.substream(1), s.substream(2));
        assert_ne!(s.substream(1), s.with_stream(4).substream(1));
    }

    #[test]
    fn moments_of_a_large_sample() {
        let g = gaussian_matrix(Seed::new(7), 200, 200).unwrap();
        let n = g.as_slice().len() as f64;
        let mean = g.as_slice().iter().sum::<f64>() / n;
        let var = g.as_slice().iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var - 1.0).abs() < 0.05, "var {var}");
    }

    #[test]
    fn small_gaussian_matrices_have_full_rank() {
        for t in 0..100 {
            let s = singular_values(&gaussian_matrix(Seed::new(1).with_stream(t), 8, 8).unwrap()).unwrap();
            assert!(s[7] / s[0] > 1e-10);
        }
    }

    #[test]
    fn circulant_draws_exactly_n_normals() {
        let seed = Seed::new(9);
        let c = gaussian_circulant(seed, 8).unwrap();
        let mut s = seed.sampler();
        assert_eq!(c.first_column(), s.normals(8).as_slice());
        assert_eq!(s.normals_drawn(), 8);
        let m = c.materialize().unwrap();
        for i in 0..8 {
            for j in 0..8 {
                assert_eq!(m.get(i, j), m.get((i + 1) % 8, (j + 1) % 8));
            }
        }
        assert!(gaussian_circulant(seed, 6).is_err());
    }

    #[test]
    fn toeplitz_coefficients() {
        let seed = Seed::new(10);
        let t = gaussian_toeplitz(seed, 3, 4, StructureKind::Toeplitz).unwrap();
        let c = seed.sampler().normals(6);
        assert_eq!(t.first_column(), &c[..3]);
        assert_eq!(&t.first_row()[1..], &c[3..]);
        let m = t.materialize().unwrap();
        for i in 0..2 {
            for j in 0..3 {
                assert_eq!(m.get(i, j), m.get(i + 1, j + 1));
            }
        }
        let big = gaussian_toeplitz(Seed::new(11), 400, 401, StructureKind::Hankel).unwrap();
        let all: Vec<f64> = big.first_column().iter().chain(&big.first_row()[1..]).copied().collect();
        let mean = all.iter().sum::<f64>() / all.len() as f64;
        assert!(mean.abs() < 4.0 / (all.len() as f64).sqrt());
    }

    #[test]
    fn orthonormal_factor() {
        let q1 = random_orthonormal(Seed::new(3), 1).unwrap();
        assert_eq!(q1.get(0, 0).abs(), 1.0);
        let q = random_orthonormal(Seed::new(3), 16).unwrap();
        assert!(q.transpose().mat_mul(&q).unwrap().distance_from_identity() < 1e-10);
        assert!(singular_values(&q).unwrap().iter().all(|s| (s - 1.0).abs() < 1e-10));
    }

    #[test]
    fn singleton_set_gives_constant_matrix() {
        let d = FiniteSet::new(vec![5]).unwrap();
        for kind in [MatrixKind::Dense, MatrixKind::Toeplitz] {
            let m = finite_set_matrix(Seed::new(1), 3, 4, &d, kind).unwrap();
            assert!(m.as_slice().iter().all(|&v| v == 5.0));
        }
    }

    #[test]
    fn finite_set_toeplitz_index_law() {
        let d = FiniteSet::range(0, 9).unwrap();
        let m = finite_set_integers(Seed::new(4), 4, 5, &d, MatrixKind::Toeplitz).unwrap();
        for i in 0..3 {
            for j in 0..4 {
                assert_eq!(m[i][j], m[i + 1][j + 1]);
            }
        }
    }

    #[test]
    fn finite_set_frequencies_are_uniform() {
        let d = FiniteSet::range(-2, 2).unwrap();
        let draws = finite_set_integers(Seed::new(5), 100, 1000, &d, MatrixKind::Dense).unwrap();
        let total: f64 = 100_000.0;
        let p = 0.2;
        let se = (total * p * (1.0 - p)).sqrt();
        for v in d.values() {
            let count = draws.iter().flatten().filter(|&&x| x == *v).count() as f64;
            assert!((count - total * p).abs() < 4.0 * se, "value {v}: {count}");
        }
    }

    #[test]
    fn finite_set_validation() {
        assert!(FiniteSet::new(vec![]).is_err());
        assert!(FiniteSet::new(vec![1, 1]).is_err());
        assert_eq!(FiniteSet::new(vec![3, 1, 2]).unwrap().values(), &[1, 2, 3]);
        assert_eq!(FiniteSet::range(0, 9).unwrap().cardinality(), 10);
    }

    #[test]
    fn orthogonal_mixing_keeps_moments() {
        let s = random_orthonormal(Seed::new(8), 6).unwrap();
        let mut values = Vec::new();
        for t in 0..2000 {
            let g = gaussian_matrix(Seed::new(9).with_stream(t), 6, 6).unwrap();
            values.extend_from_slice(s.mat_mul(&g).unwrap().as_slice());
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 4.0 / n.sqrt());
        assert!((var - 1.0).abs() < 4.0 * (2.0 / n).sqrt());
    }

    #[test]
    fn seeds_parse_decimal_and_hex() {
        assert_eq!("42".parse::<Seed>().unwrap(), Seed::new(42));
        assert_eq!("0x2a".parse::<Seed>().unwrap(), Seed::new(42));
        assert!("forty".parse::<Seed>().is_err());
    }
}
