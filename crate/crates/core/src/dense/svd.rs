//! One-sided (Hestenes) Jacobi SVD.
//!
//! Columns of a working copy are rotated pairwise until every pair is
//! orthogonal to a relative tolerance; the column norms are then the singular
//! values. Accurate for tiny singular values, which is what the condition
//! and rank checks in this crate lean on.

use serde::{Deserialize, Serialize};

use super::matrix::RealMatrix;
use super::qr::full_q;
use crate::error::{Error, Result};

/// Rotation threshold on `|a_pq| / sqrt(a_pp a_qq)`.
pub const JACOBI_TOLERANCE: f64 = 1e-14;
pub const MAX_SWEEPS: usize = 60;
/// Largest `min(rows, cols)` handled by the Jacobi kernel.
pub const JACOBI_SIZE_CAP: usize = 1024;
/// Default cut-off for `sigma_j / sigma_1` treated as numerically zero.
pub const DEFAULT_RANK_TOLERANCE: f64 = 1e-10;

/// Full SVD `A = S diag(sigma) V^T` with square orthogonal factors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SvdResult {
    /// `m x m`.
    pub left_factor: RealMatrix,
    /// Nonincreasing, length `min(m, n)`.
    pub singular_values: Vec<f64>,
    /// `n x n`.
    pub right_factor: RealMatrix,
}

impl SvdResult {
    pub fn rank(&self, tolerance: f64) -> usize {
        numerical_rank(&self.singular_values, tolerance)
    }

    /// Rebuilds `S diag(sigma) V^T`, keeping only the `keep` largest values.
    pub fn truncated(&self, keep: usize) -> RealMatrix {
        let m = self.left_factor.rows();
        let n = self.right_factor.rows();
        RealMatrix::from_fn(m, n, |i, j| {
            self.singular_values
                .iter()
                .enumerate()
                .take(keep)
                .map(|(t, s)| self.left_factor.get(i, t) * s * self.right_factor.get(j, t))
                .sum()
        })
    }

    pub fn reconstruct(&self) -> RealMatrix {
        self.truncated(self.singular_values.len())
    }
}

/// Count of singular values with `sigma_j > tolerance * sigma_1`.
pub fn numerical_rank(singular_values: &[f64], tolerance: f64) -> usize {
    let top = singular_values.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    singular_values.iter().filter(|&&s| s > tolerance * top).count()
}

/// Column-major working copy with `rows >= cols`.
struct Columns {
    m: usize,
    n: usize,
    data: Vec<f64>,
}

impl Columns {
    /// Oriented so that the column count is `min(rows, cols)`.
    fn oriented(a: &RealMatrix) -> (Self, bool) {
        let (r, c) = a.shape();
        if r >= c {
            // column-major of A == row-major of A^T
            (Columns { m: r, n: c, data: a.transpose().into_vec() }, false)
        } else {
            (Columns { m: c, n: r, data: a.as_slice().to_vec() }, true)
        }
    }

    #[inline]
    fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.m..(j + 1) * self.m]
    }

    #[inline]
    fn pair_mut(data: &mut [f64], m: usize, p: usize, q: usize) -> (&mut [f64], &mut [f64]) {
        debug_assert!(p < q);
        let (lo, hi) = data.split_at_mut(q * m);
        (&mut lo[p * m..(p + 1) * m], &mut hi[..m])
    }
}

#[inline]
fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let (u, v) = (*a, *b);
        *a = c * u - s * v;
        *b = s * u + c * v;
    }
}

/// Orthogonalises the columns of `w`; when `v` is given (column-major
/// `n x n`), accumulates the right rotations into it.
fn jacobi_sweeps(w: &mut Columns, mut v: Option<&mut Vec<f64>>, tol: f64) -> Result<()> {
    let (m, n) = (w.m, w.n);
    let mut norms: Vec<f64> = (0..n).map(|j| w.col(j).iter().map(|x| x * x).sum()).collect();
    let mut worst = 0.0f64;
    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        worst = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                let (app, aqq) = (norms[p], norms[q]);
                if app == 0.0 || aqq == 0.0 {
                    continue;
                }
                let apq: f64 = w.col(p).iter().zip(w.col(q)).map(|(a, b)| a * b).sum();
                let rel = apq.abs() / (app.sqrt() * aqq.sqrt());
                if !(rel > tol) {
                    continue;
                }
                worst = worst.max(rel);
                rotated = true;
                let zeta = (aqq - app) / (2.0 * apq);
                let t = if zeta.abs() > 1e150 {
                    0.5 / zeta
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (x, y) = Columns::pair_mut(&mut w.data, m, p, q);
                rotate(x, y, c, s);
                norms[p] = app - t * apq;
                norms[q] = aqq + t * apq;
                if let Some(v) = v.as_deref_mut() {
                    let (x, y) = Columns::pair_mut(v, n, p, q);
                    rotate(x, y, c, s);
                }
            }
        }
        // refresh norms against drift from the incremental updates
        for (j, nj) in norms.iter_mut().enumerate() {
            *nj = w.col(j).iter().map(|x| x * x).sum();
        }
        if !rotated {
            return Ok(());
        }
    }
    Err(Error::NoConvergence { sweeps: MAX_SWEEPS, residual: worst })
}

fn check_cap(a: &RealMatrix) -> Result<()> {
    let k = a.rows().min(a.cols());
    if k > JACOBI_SIZE_CAP {
        return Err(Error::SizeCap { size: k, cap: JACOBI_SIZE_CAP });
    }
    Ok(())
}

/// Singular values only, nonincreasing, length `min(m, n)`.
pub fn singular_values(a: &RealMatrix) -> Result<Vec<f64>> {
    check_cap(a)?;
    let (mut w, _) = Columns::oriented(a);
    jacobi_sweeps(&mut w, None, JACOBI_TOLERANCE)?;
    let mut s: Vec<f64> = (0..w.n).map(|j| super::matrix::vec_norm(w.col(j))).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Full SVD by one-sided Jacobi with cyclic sweeps.
pub fn jacobi_svd(a: &RealMatrix) -> Result<SvdResult> {
    check_cap(a)?;
    let (mut w, transposed) = Columns::oriented(a);
    let (m, n) = (w.m, w.n);
    let mut v = RealMatrix::identity(n).into_vec();
    jacobi_sweeps(&mut w, Some(&mut v), JACOBI_TOLERANCE)?;

    let sigma: Vec<f64> = (0..n).map(|j| super::matrix::vec_norm(w.col(j))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]));

    // columns too small to normalise safely are treated as exact zeros
    let floor = f64::MIN_POSITIVE.sqrt();
    let sorted: Vec<f64> = order.iter().map(|&j| if sigma[j] > floor { sigma[j] } else { 0.0 }).collect();
    let nonzero = sorted.iter().filter(|&&s| s > 0.0).count();

    let u_thin = RealMatrix::from_fn(m, nonzero, |i, t| {
        let j = order[t];
        w.col(j)[i] / sigma[j]
    });
    let left = if nonzero == m {
        u_thin
    } else if nonzero == 0 {
        RealMatrix::identity(m)
    } else {
        let q = full_q(&u_thin);
        RealMatrix::from_fn(m, m, |i, t| if t < nonzero { u_thin.get(i, t) } else { q.get(i, t) })
    };
    let right = RealMatrix::from_fn(n, n, |i, t| v[order[t] * n + i]);

    Ok(if transposed {
        SvdResult { left_factor: right, singular_values: sorted, right_factor: left }
    } else {
        SvdResult { left_factor: left, singular_values: sorted, right_factor: right }
    })
}

/// Largest singular value by power iteration on `A^T A`: at most 200
/// iterations or until the relative change drops below `1e-10`.
pub fn power_iteration_norm(a: &RealMatrix) -> f64 {
    let n = a.cols();
    let at = a.transpose();
    // deterministic start vector with no special alignment
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 7919) % 104729) as f64 * 1e-6).collect();
    let mut estimate = 0.0f64;
    for _ in 0..200 {
        let nx = super::matrix::vec_norm(&x);
        if nx == 0.0 {
            return 0.0;
        }
        x.iter_mut().for_each(|v| *v /= nx);
        let y = a.mat_vec(&x).expect("shape checked");
        let next = super::matrix::vec_norm(&y);
        x = at.mat_vec(&y).expect("shape checked");
        let done = estimate > 0.0 && ((next - estimate).abs() / next) < 1e-10;
        estimate = next;
        if done {
            break;
        }
    }
    estimate
}

/// Spectral norm `||A||_2 = sigma_1(A)`: Jacobi up to the size cap, power
/// iteration beyond it.
pub fn spectral_norm(a: &RealMatrix) -> f64 {
    if a.rows().min(a.cols()) > JACOBI_SIZE_CAP {
        return power_iteration_norm(a);
    }
    match singular_values(a) {
        Ok(s) => s[0],
        Err(_) => power_iteration_norm(a),
    }
}

/// Smallest singular value of a square matrix.
pub fn min_singular_value(a: &RealMatrix) -> Result<f64> {
    Ok(*singular_values(a)?.last().expect("nonempty"))
}

/// `||A^{-1}|| = 1 / sigma_min(A)` for a square, numerically nonsingular `A`.
pub fn inverse_norm(a: &RealMatrix) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::Shape(format!("inverse_norm needs a square matrix, got {:?}", a.shape())));
    }
    let s = singular_values(a)?;
    let (top, bottom) = (s[0], *s.last().expect("nonempty"));
    if !(bottom > 1e-13 * top) {
        return Err(Error::Singular { sigma_min: bottom });
    }
    Ok(1.0 / bottom)
}

/// `||A^+|| = 1 / sigma_rho(A)` with the rank taken at `tolerance`.
pub fn pinv_norm(a: &RealMatrix, tolerance: f64) -> Result<f64> {
    let s = singular_values(a)?;
    let rho = numerical_rank(&s, tolerance);
    if rho == 0 {
        return Ok(0.0);
    }
    Ok(1.0 / s[rho - 1])
}

/// Condition number `sigma_1 / sigma_rho`.
pub fn condition_number(a: &RealMatrix) -> Result<f64> {
    let s = singular_values(a)?;
    let last = *s.last().expect("nonempty");
    Ok(if last == 0.0 { f64::INFINITY } else { s[0] / last })
}
