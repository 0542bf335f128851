use serde::{Deserialize, Serialize};

use super::safety::{norm_pair, MonitorLevel, NormKind, SafetyReport, StepRecord};
use super::Factorization;
use crate::dense::{back_substitution, forward_substitution, RealMatrix};
use crate::error::{Error, Result};

/// `A = L U` with unit lower triangular `L`, computed without row exchanges.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenpFactorization {
    pub l_factor: RealMatrix,
    pub u_factor: RealMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenpOptions {
    /// A pivot with `|pivot| <= zero_pivot_threshold` aborts the run.
    pub zero_pivot_threshold: f64,
    pub monitor: MonitorLevel,
}

impl Default for GenpOptions {
    fn default() -> Self {
        Self { zero_pivot_threshold: 0.0, monitor: MonitorLevel::Pivots }
    }
}

/// GENP with the default (pivot-only) monitor.
pub fn genp_factor(a: &RealMatrix, zero_pivot_threshold: f64) -> Result<(GenpFactorization, SafetyReport)> {
    genp_factor_with(a, GenpOptions { zero_pivot_threshold, ..Default::default() })
}

pub fn genp_factor_with(a: &RealMatrix, opts: GenpOptions) -> Result<(GenpFactorization, SafetyReport)> {
    if !a.is_square() {
        return Err(Error::Shape(format!("GENP needs a square matrix, got {:?}", a.shape())));
    }
    if !(opts.zero_pivot_threshold >= 0.0) {
        return Err(Error::InvalidArgument("zero_pivot_threshold must be nonnegative".into()));
    }
    let n = a.rows();
    let full = opts.monitor == MonitorLevel::Full;
    let mut report = if full {
        let (norm, _, kind) = norm_pair(a);
        SafetyReport::new(n, norm, kind)
    } else {
        SafetyReport::new(n, a.frobenius_norm(), NormKind::Frobenius)
    };

    let mut w = a.clone();
    for k in 0..n {
        let pivot = w.get(k, k);
        if pivot.abs() <= opts.zero_pivot_threshold {
            return Err(Error::ZeroPivot { step: k + 1, pivot });
        }
        let mut trailing_sq = 0.0f64;
        {
            let data = w.as_mut_slice();
            let (head, tail) = data.split_at_mut((k + 1) * n);
            let pivot_row = &head[k * n..(k + 1) * n];
            for row in tail.chunks_exact_mut(n) {
                let l = row[k] / pivot;
                row[k] = l;
                for (x, &p) in row[k + 1..].iter_mut().zip(&pivot_row[k + 1..]) {
                    *x -= l * p;
                    trailing_sq += *x * *x;
                }
            }
        }
        let remaining = n - k - 1;
        let (schur_norm, schur_inverse_norm, kind) = if remaining == 0 {
            (None, None, report.input_norm_kind)
        } else if full {
            let s = w.submatrix(k + 1, k + 1, remaining, remaining)?;
            let (norm, inv, kind) = norm_pair(&s);
            (Some(norm), Some(inv), kind)
        } else {
            (Some(trailing_sq.sqrt()), None, NormKind::Frobenius)
        };
        report.push(StepRecord {
            step: k + 1,
            offset: k,
            size: 1,
            pivot_norm: pivot.abs(),
            pivot_inverse_norm: 1.0 / pivot.abs(),
            schur_norm,
            schur_inverse_norm,
            norm_kind: kind,
        });
    }

    let mut l = RealMatrix::identity(n);
    let mut u = RealMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if j < i {
                l.set(i, j, w.get(i, j));
            } else {
                u.set(i, j, w.get(i, j));
            }
        }
    }
    Ok((GenpFactorization { l_factor: l, u_factor: u }, report))
}

impl GenpFactorization {
    pub fn n(&self) -> usize {
        self.l_factor.rows()
    }

    pub fn reconstruct(&self) -> RealMatrix {
        self.l_factor.mat_mul(&self.u_factor).expect("square factors")
    }
}

impl Factorization for GenpFactorization {
    fn dim(&self) -> usize {
        self.n()
    }

    fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let y = forward_substitution(&self.l_factor, b, true)?;
        back_substitution(&self.u_factor, &y)
    }
}
