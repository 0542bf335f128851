//! Deterministic checks of the elimination theory: the safety bounds on
//! pivots and growth, and the algebra of Schur complements.

use serde::{Deserialize, Serialize};

use super::bounds::{BoundFamily, BoundReport};
use crate::dense::RealMatrix;
use crate::error::{Error, Result};
use crate::factorization::{
    block_genp_factor, genp_factor_with, gepp_factor, max_leading_inverse_norm, safety_check, schur_complement,
    BlockSchedule, GenpOptions, MonitorLevel, SafetyOutcome,
};
use crate::randgen::{gaussian_matrix, Seed};

pub const SCHUR_TOLERANCE: f64 = 1e-10;
pub const DETERMINANT_TOLERANCE: f64 = 1e-8;
/// Accepted random inputs have `N_- ||A|| <=` this.
const LEADING_CONDITION_CAP: f64 = 1e4;
const RESAMPLE_BUDGET: u64 = 50;

/// `G^T G + I`, symmetric positive definite and so strongly nonsingular.
pub fn spd_instance(seed: Seed, n: usize) -> Result<RealMatrix> {
    let g = gaussian_matrix(seed, n, n)?;
    g.transpose().mat_mul(&g)?.add(&RealMatrix::identity(n))
}

/// A Gaussian matrix whose leading blocks are all reasonably conditioned,
/// resampled until it is.
pub fn strongly_nonsingular_gaussian(seed: Seed, n: usize) -> Result<RealMatrix> {
    for attempt in 0..RESAMPLE_BUDGET {
        let a = gaussian_matrix(seed.substream(attempt), n, n)?;
        if let Ok((n_minus, _)) = max_leading_inverse_norm(&a) {
            if n_minus * a.frobenius_norm() <= LEADING_CONDITION_CAP {
                return Ok(a);
            }
        }
    }
    Err(Error::Generation { attempts: RESAMPLE_BUDGET as usize, reason: "leading blocks stayed ill conditioned".into() })
}

/// Determinant from `P A = L U`.
pub fn gepp_determinant(a: &RealMatrix) -> Result<f64> {
    let f = gepp_factor(a)?;
    let mut perm = f.permutation.clone();
    let mut sign = 1.0;
    for i in 0..perm.len() {
        while perm[i] != i {
            let j = perm[i];
            perm.swap(i, j);
            sign = -sign;
        }
    }
    Ok((0..a.rows()).fold(sign, |acc, i| acc * f.u_factor.get(i, i)))
}

fn relative_gap(x: &RealMatrix, y: &RealMatrix) -> Result<f64> {
    let scale = x.frobenius_norm().max(y.frobenius_norm()).max(f64::MIN_POSITIVE);
    Ok(x.sub(y)?.frobenius_norm() / scale)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SafetyRunSummary {
    pub master_seed: u64,
    pub n: usize,
    pub trials: usize,
    /// Largest recorded pivot norm over `N_+`.
    pub worst_pivot_ratio: f64,
    /// Largest recorded inverse norm over `N_-`.
    pub worst_inverse_ratio: f64,
    /// Largest growth factor over `(N_+ N_-)^{log2 n}`.
    pub worst_growth_ratio: f64,
    pub failures: Vec<String>,
    pub passed: bool,
}

/// GENP (full monitor) and block elimination in blocks of four on
/// `trials` matrices `G^T G + I`, each checked against `N_+` and `N_-`.
pub fn verify_safety(seed: Seed, trials: usize, n: usize) -> Result<SafetyRunSummary> {
    let mut summary = SafetyRunSummary {
        master_seed: seed.master,
        n,
        trials,
        worst_pivot_ratio: 0.0,
        worst_inverse_ratio: 0.0,
        worst_growth_ratio: 0.0,
        failures: Vec::new(),
        passed: true,
    };
    let block = if n % 4 == 0 { 4 } else { 1 };
    for t in 0..trials {
        let a = spd_instance(seed.with_stream(t as u64), n)?;
        let (_, scalar) = genp_factor_with(&a, GenpOptions { zero_pivot_threshold: 0.0, monitor: MonitorLevel::Full })?;
        let (_, blocked) = block_genp_factor(&a, &BlockSchedule::uniform(n, block)?)?;
        for (label, report) in [("scalar", scalar), ("block", blocked)] {
            match safety_check(&a, &report) {
                SafetyOutcome::Checked(v) => {
                    summary.worst_pivot_ratio = summary.worst_pivot_ratio.max(v.pivot_margin);
                    summary.worst_inverse_ratio = summary.worst_inverse_ratio.max(v.inverse_margin);
                    summary.worst_growth_ratio = summary.worst_growth_ratio.max(v.growth_factor / v.growth_bound);
                    for viol in &v.violations {
                        summary.failures.push(format!(
                            "trial {t} {label} step {}: {} = {:.6e} > {:.6e}",
                            viol.step, viol.quantity, viol.value, viol.bound
                        ));
                    }
                }
                SafetyOutcome::NotStronglyNonsingular { block_size, ratio } => {
                    summary.failures.push(format!("trial {t}: leading block {block_size} singular ({ratio:e})"));
                }
            }
        }
    }
    summary.passed = summary.failures.is_empty();
    Ok(summary)
}

/// Schedule invariance and nesting of Schur complements on `trials`
/// random `n x n` matrices, and `det A = det B det S` on `8 x 8` ones.
pub fn verify_schur_algebra(seed: Seed, trials: usize, n: usize) -> Result<BoundReport> {
    if n < 4 || n % 4 != 0 {
        return Err(Error::InvalidArgument(format!("order must be a positive multiple of 4, got {n}")));
    }
    let mut invariance = BoundFamily::new("schedule_invariance");
    let mut leading = BoundFamily::new("nested_leading_block");
    let mut quotient = BoundFamily::new("schur_of_schur");
    let mut det = BoundFamily::new("determinant_factorizes");
    let scalar_schedule = BlockSchedule::scalar(n);
    let block_schedule = BlockSchedule::uniform(n, 4)?;
    for t in 0..trials {
        let a = strongly_nonsingular_gaussian(seed.with_stream(t as u64), n)?;
        let (scalar, _) = block_genp_factor(&a, &scalar_schedule)?;
        let (blocked, _) = block_genp_factor(&a, &block_schedule)?;
        for k in (4..n).step_by(4) {
            let direct = schur_complement(&a, k)?;
            for (label, f) in [("scalar", &scalar), ("block", &blocked)] {
                let s = f.schur_complement_at(k)?.expect("k < n");
                invariance.at_most(relative_gap(&s, &direct)?, SCHUR_TOLERANCE, 0.0, || format!("trial {t} {label} k={k}"));
            }
        }
        let complements = (1..n).map(|k| schur_complement(&a, k)).collect::<Result<Vec<_>>>()?;
        for h in 1..n - 1 {
            let outer = &complements[h - 1];
            for k in h + 1..n {
                // S(A^(h), A^(k)) is the leading (k-h) block of S(A^(h), A)
                let inner = schur_complement(&a.leading_block(k, k)?, h)?;
                let lead = outer.leading_block(k - h, k - h)?;
                leading.at_most(relative_gap(&inner, &lead)?, SCHUR_TOLERANCE, 0.0, || format!("trial {t} h={h} k={k}"));
                // eliminating k-h more columns of S(A^(h), A) gives S(A^(k), A)
                let twice = schur_complement(outer, k - h)?;
                quotient.at_most(relative_gap(&twice, &complements[k - 1])?, SCHUR_TOLERANCE, 0.0, || format!("trial {t} h={h} k={k}"));
            }
        }
        let small = strongly_nonsingular_gaussian(seed.substream(0xDE7).with_stream(t as u64), 8)?;
        for k in 1..8 {
            let whole = gepp_determinant(&small)?;
            let product = gepp_determinant(&small.leading_block(k, k)?)? * gepp_determinant(&schur_complement(&small, k)?)?;
            let gap = (whole - product).abs() / whole.abs().max(f64::MIN_POSITIVE);
            det.at_most(gap, DETERMINANT_TOLERANCE, 0.0, || format!("trial {t} k={k}: {whole:e} vs {product:e}"));
        }
    }
    Ok(BoundReport::new("schur complement algebra", seed.master, trials, vec![invariance, leading, quotient, det]))
}
