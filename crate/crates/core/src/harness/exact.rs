//! Exact integer determinants and the singularity probabilities of random
//! matrices with entries from a finite set.

use serde::{Deserialize, Serialize};

use super::tails::binomial_margin;
use crate::error::{Error, Result};
use crate::randgen::{finite_set_integers, FiniteSet, MatrixKind, Seed};

pub const EXACT_SIZE_CAP: usize = 6;
pub const FINITE_SET_CARDINALITY_CAP: usize = 1000;

/// Hadamard bound `prod_i ||row_i||` as a float; minors of the matrix
/// never exceed it.
fn hadamard_bound(m: &[Vec<i64>]) -> f64 {
    m.iter().map(|r| r.iter().map(|&v| (v as f64) * (v as f64)).sum::<f64>().sqrt()).product()
}

fn overflow_safe(hadamard: f64) -> bool {
    // Bareiss numerators are differences of two products of minors
    2.0 * hadamard * hadamard < i128::MAX as f64 / 2.0
}

/// Determinant by fraction-free (Bareiss) elimination with row swaps.
pub fn exact_determinant_int(m: &[Vec<i64>]) -> Result<i128> {
    let k = m.len();
    if k == 0 || m.iter().any(|r| r.len() != k) {
        return Err(Error::Shape("exact determinant needs a nonempty square matrix".into()));
    }
    if k > EXACT_SIZE_CAP {
        return Err(Error::SizeCap { size: k, cap: EXACT_SIZE_CAP });
    }
    let h = hadamard_bound(m);
    if !overflow_safe(h) {
        return Err(Error::Overflow(format!("Hadamard bound {h:e} too large for 128-bit elimination")));
    }
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&v| v as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for p in 0..k {
        if a[p][p] == 0 {
            match (p + 1..k).find(|&r| a[r][p] != 0) {
                Some(r) => {
                    a.swap(p, r);
                    sign = -sign;
                }
                None => return Ok(0),
            }
        }
        for i in p + 1..k {
            for j in p + 1..k {
                // exact division by the previous pivot
                a[i][j] = (a[i][j] * a[p][p] - a[i][p] * a[p][j]) / prev;
            }
            a[i][p] = 0;
        }
        prev = a[p][p];
    }
    Ok(sign * a[k - 1][k - 1])
}

/// Whether every leading principal minor is nonzero.
pub fn is_strongly_nonsingular_int(m: &[Vec<i64>]) -> Result<bool> {
    for j in 1..=m.len() {
        let lead: Vec<Vec<i64>> = m[..j].iter().map(|r| r[..j].to_vec()).collect();
        if exact_determinant_int(&lead)? == 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyCheck {
    pub event: String,
    pub kind: MatrixKind,
    pub empirical: f64,
    /// Lower bound on the probability.
    pub bound: f64,
    pub margin: f64,
    pub verdict: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteSetReport {
    pub master_seed: u64,
    pub k: usize,
    pub cardinality: usize,
    pub trials: usize,
    pub checks: Vec<FrequencyCheck>,
    pub passed: bool,
}

fn frequency_check(event: &str, kind: MatrixKind, hits: usize, trials: usize, bound: f64) -> FrequencyCheck {
    let empirical = hits as f64 / trials as f64;
    let margin = binomial_margin(bound, trials);
    FrequencyCheck {
        event: event.to_string(),
        kind,
        empirical,
        bound,
        margin,
        verdict: bound <= 0.0 || empirical >= bound - margin,
    }
}

/// Frequencies of nonsingular and strongly nonsingular `k x k` matrices
/// with entries from `delta`, against `1 - k/|delta|` and
/// `1 - k(k+1)/(2|delta|)`.
pub fn check_finite_set_singularity(seed: Seed, k: usize, delta: &FiniteSet, trials: usize) -> Result<FiniteSetReport> {
    if k == 0 || k > EXACT_SIZE_CAP {
        return Err(Error::SizeCap { size: k, cap: EXACT_SIZE_CAP });
    }
    let card = delta.cardinality();
    if card > FINITE_SET_CARDINALITY_CAP {
        return Err(Error::SizeCap { size: card, cap: FINITE_SET_CARDINALITY_CAP });
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    // worst case over all matrices with these entries, checked up front
    let worst = (delta.max_abs() as f64 * (k as f64).sqrt()).powi(k as i32);
    if !overflow_safe(worst) {
        return Err(Error::Overflow(format!("k = {k} with max |entry| {} exceeds 128-bit elimination", delta.max_abs())));
    }
    let nonsingular_bound = 1.0 - k as f64 / card as f64;
    let strong_bound = 1.0 - (k * (k + 1)) as f64 / (2.0 * card as f64);
    let mut checks = Vec::new();
    for (tag, kind) in [(1u64, MatrixKind::Dense), (2, MatrixKind::Toeplitz)] {
        let base = seed.substream(tag);
        let (mut nonsingular, mut strong) = (0usize, 0usize);
        for t in 0..trials {
            let m = finite_set_integers(base.with_stream(t as u64), k, k, delta, kind)?;
            if exact_determinant_int(&m)? != 0 {
                nonsingular += 1;
                if is_strongly_nonsingular_int(&m)? {
                    strong += 1;
                }
            }
        }
        checks.push(frequency_check("nonsingular", kind, nonsingular, trials, nonsingular_bound));
        checks.push(frequency_check("strongly_nonsingular", kind, strong, trials, strong_bound));
    }
    let passed = checks.iter().all(|c| c.verdict);
    Ok(FiniteSetReport { master_seed: seed.master, k, cardinality: card, trials, checks, passed })
}
