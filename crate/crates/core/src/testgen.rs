//! Nonsingular test systems on which GENP breaks down.
//!
//! `A = [[A_k, B], [C, D]]` with `k = n/2`, `A_k = U Σ V^T` for random
//! orthogonal `U`, `V` and `Σ = diag(1, ..., 1, 0, ..., 0)` with `h` zeros,
//! and `B`, `C`, `D` Gaussian Toeplitz blocks scaled to unit spectral norm.
//! The leading block is singular, the whole matrix is not.

use serde::{Deserialize, Serialize};

use crate::dense::{singular_values, spectral_norm, vec_norm, RealMatrix};
use crate::error::{Error, Result};
use crate::harness::StatsRow;
use crate::randgen::{gaussian_toeplitz, gaussian_vector, random_orthonormal, Seed};
use crate::transforms::StructureKind;

pub const DEFAULT_NULLITY: usize = 4;
pub const RETRY_BUDGET: usize = 5;
/// Singular values of the leading block below this count as zero.
pub const LEADING_ZERO_TOLERANCE: f64 = 1e-10;
/// Smallest accepted `sigma_min(A) / sigma_max(A)`.
pub const MIN_RECIPROCAL_CONDITION: f64 = 1e-12;

const TAG_U: u64 = 1;
const TAG_V: u64 = 2;
const TAG_B: u64 = 3;
const TAG_C: u64 = 4;
const TAG_D: u64 = 5;
const TAG_RHS: u64 = 6;
const TAGS_PER_ATTEMPT: u64 = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionRecord {
    pub seed: Seed,
    /// 1-based attempt that produced the instance.
    pub attempt: usize,
    /// Spectral norms of the raw `B`, `C`, `D` before scaling.
    pub block_norms: [f64; 3],
    pub sigma_max: f64,
    pub sigma_min: f64,
}

impl ConstructionRecord {
    /// `||A^{-1}|| = 1 / sigma_min(A)`.
    pub fn inverse_norm(&self) -> f64 {
        1.0 / self.sigma_min
    }

    pub fn condition_number(&self) -> f64 {
        self.sigma_max / self.sigma_min
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardInstance {
    pub matrix: RealMatrix,
    /// Unit-norm right-hand side.
    pub rhs: Vec<f64>,
    pub n: usize,
    pub h: usize,
    pub record: ConstructionRecord,
}

fn validate(n: usize, h: usize) -> Result<()> {
    if n < 8 || !n.is_power_of_two() {
        return Err(Error::InvalidArgument(format!("order must be a power of two >= 8, got {n}")));
    }
    if h >= n / 2 {
        return Err(Error::InvalidArgument(format!("nullity {h} must be below {}", n / 2)));
    }
    Ok(())
}

fn unit_toeplitz(seed: Seed, k: usize) -> Result<(RealMatrix, f64)> {
    let t = gaussian_toeplitz(seed, k, k, StructureKind::Toeplitz)?.materialize()?;
    let norm = spectral_norm(&t);
    Ok((t.scale(1.0 / norm), norm))
}

/// The singular leading block `U Σ V^T`.
fn leading_part(base: Seed, k: usize, h: usize) -> Result<RealMatrix> {
    let u = random_orthonormal(base.substream(TAG_U), k)?;
    let v = random_orthonormal(base.substream(TAG_V), k)?;
    // U Σ keeps the first k - h columns of U
    let us = RealMatrix::from_fn(k, k, |i, j| if j < k - h { u.get(i, j) } else { 0.0 });
    us.mat_mul(&v.transpose())
}

pub fn hard_matrix(seed: Seed, n: usize, h: usize) -> Result<HardInstance> {
    validate(n, h)?;
    let k = n / 2;
    let mut last_reason = String::new();
    for attempt in 0..RETRY_BUDGET {
        let base = if attempt == 0 { seed } else { seed.substream(TAGS_PER_ATTEMPT * attempt as u64) };
        let ak = leading_part(base, k, h)?;
        let lead = singular_values(&ak)?;
        let zeros = lead.iter().filter(|&&s| s < LEADING_ZERO_TOLERANCE).count();
        let ones_ok = lead[..k - h].iter().all(|s| (s - 1.0).abs() <= LEADING_ZERO_TOLERANCE);
        if zeros != h || !ones_ok {
            last_reason = format!("leading block has {zeros} null directions, wanted {h}");
            continue;
        }
        let (b, nb) = unit_toeplitz(base.substream(TAG_B), k)?;
        let (c, nc) = unit_toeplitz(base.substream(TAG_C), k)?;
        let (d, nd) = unit_toeplitz(base.substream(TAG_D), k)?;
        let a = RealMatrix::from_blocks(&ak, &b, &c, &d)?;
        let s = singular_values(&a)?;
        let (sigma_max, sigma_min) = (s[0], s[n - 1]);
        if !(sigma_min > MIN_RECIPROCAL_CONDITION * sigma_max) {
            last_reason = format!("assembled matrix is numerically singular ({:.3e})", sigma_min / sigma_max);
            continue;
        }
        let mut rhs = gaussian_vector(base.substream(TAG_RHS), n);
        let norm = vec_norm(&rhs);
        rhs.iter_mut().for_each(|v| *v /= norm);
        return Ok(HardInstance {
            matrix: a,
            rhs,
            n,
            h,
            record: ConstructionRecord { seed, attempt: attempt + 1, block_norms: [nb, nc, nd], sigma_max, sigma_min },
        });
    }
    Err(Error::Generation { attempts: RETRY_BUDGET, reason: last_reason })
}

/// Summary of `||A^{-1}||` over one instance per seed.
pub fn instance_inverse_norm_stats(seeds: &[Seed], n: usize, h: usize) -> Result<StatsRow> {
    if seeds.len() < 10 {
        return Err(Error::InvalidArgument(format!("need at least 10 seeds, got {}", seeds.len())));
    }
    let norms = seeds
        .iter()
        .map(|&s| hard_matrix(s, n, h).map(|inst| inst.record.inverse_norm()))
        .collect::<Result<Vec<_>>>()?;
    Ok(StatsRow::from_samples(n, 0, norms, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::numerical_rank;

    #[test]
    fn zero_nullity_gives_orthogonal_leading_block() {
        let inst = hard_matrix(Seed::new(1), 8, 0).unwrap();
        let lead = singular_values(&inst.matrix.leading_block(4, 4).unwrap()).unwrap();
        assert!(lead.iter().all(|s| (s - 1.0).abs() < 1e-10));
    }

    #[test]
    fn nullity_four_at_order_64() {
        let inst = hard_matrix(Seed::new(2), 64, 4).unwrap();
        let lead = singular_values(&inst.matrix.leading_block(32, 32).unwrap()).unwrap();
        assert_eq!(lead.iter().filter(|&&s| s < 1e-10).count(), 4);
        assert!(lead[..28].iter().all(|s| (s - 1.0).abs() < 1e-10));
        assert!((vec_norm(&inst.rhs) - 1.0).abs() < 1e-14);
        let full = singular_values(&inst.matrix).unwrap();
        assert_eq!(numerical_rank(&full, 1e-10), 64);
        for (i, j) in [(0usize, 32usize), (32, 0), (32, 32)] {
            let block = inst.matrix.submatrix(i, j, 32, 32).unwrap();
            assert!((spectral_norm(&block) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let a = hard_matrix(Seed::new(3).with_stream(5), 16, 2).unwrap();
        let b = hard_matrix(Seed::new(3).with_stream(5), 16, 2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn parameter_validation() {
        assert!(hard_matrix(Seed::new(1), 12, 1).is_err());
        assert!(hard_matrix(Seed::new(1), 4, 1).is_err());
        assert!(hard_matrix(Seed::new(1), 16, 8).is_err());
        let few: Vec<Seed> = (0..5).map(|t| Seed::new(1).with_stream(t)).collect();
        assert!(instance_inverse_norm_stats(&few, 16, 4).is_err());
    }

    #[test]
    fn inverse_norm_stats_over_seeds() {
        let seeds: Vec<Seed> = (0..10).map(|t| Seed::new(4).with_stream(t)).collect();
        let hard = instance_inverse_norm_stats(&seeds, 32, 4).unwrap();
        assert!(hard.min >= 1.0 && hard.min <= hard.max);
        assert_eq!(hard.count, 10);
    }
}
