use serde::{Deserialize, Serialize};

use super::matrix::RealMatrix;
use crate::error::{Error, Result};

/// Thin QR factors: `q_factor` is `m x n` with orthonormal columns,
/// `r_factor` is `n x n` upper triangular with a nonnegative diagonal.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QrResult {
    pub q_factor: RealMatrix,
    pub r_factor: RealMatrix,
}

struct Reflectors {
    /// Householder vectors, `vs[j]` acts on rows `j..m`.
    vs: Vec<Vec<f64>>,
    betas: Vec<f64>,
    r: RealMatrix,
}

fn reduce(a: &RealMatrix) -> Reflectors {
    let (m, n) = a.shape();
    let mut r = a.clone();
    let steps = n.min(m);
    let mut vs = Vec::with_capacity(steps);
    let mut betas = Vec::with_capacity(steps);
    for j in 0..steps {
        let x: Vec<f64> = (j..m).map(|i| r.get(i, j)).collect();
        let norm = super::matrix::vec_norm(&x);
        if norm == 0.0 || (x.len() == 1) {
            vs.push(vec![0.0; m - j]);
            betas.push(0.0);
            continue;
        }
        let alpha = if x[0] >= 0.0 { -norm } else { norm };
        let mut v = x;
        v[0] -= alpha;
        let vtv: f64 = v.iter().map(|t| t * t).sum();
        if vtv == 0.0 {
            vs.push(vec![0.0; m - j]);
            betas.push(0.0);
            continue;
        }
        let beta = 2.0 / vtv;
        // apply (I - beta v v^T) to columns j..n
        for c in j..n {
            let s: f64 = (j..m).map(|i| v[i - j] * r.get(i, c)).sum::<f64>() * beta;
            if s != 0.0 {
                for i in j..m {
                    let val = r.get(i, c) - s * v[i - j];
                    r.set(i, c, val);
                }
            }
        }
        r.set(j, j, alpha);
        for i in j + 1..m {
            r.set(i, j, 0.0);
        }
        vs.push(v);
        betas.push(beta);
    }
    Reflectors { vs, betas, r }
}

/// Applies `H_0 H_1 ... H_{k-1}` to the first `width` columns of the identity.
fn accumulate_q(refl: &Reflectors, m: usize, width: usize) -> RealMatrix {
    let mut q = RealMatrix::from_fn(m, width, |i, j| if i == j { 1.0 } else { 0.0 });
    for j in (0..refl.vs.len()).rev() {
        let beta = refl.betas[j];
        if beta == 0.0 {
            continue;
        }
        let v = &refl.vs[j];
        for c in 0..width {
            let s: f64 = (j..m).map(|i| v[i - j] * q.get(i, c)).sum::<f64>() * beta;
            if s != 0.0 {
                for i in j..m {
                    let val = q.get(i, c) - s * v[i - j];
                    q.set(i, c, val);
                }
            }
        }
    }
    q
}

/// Householder QR of a tall or square matrix with sign-normalised `R`.
///
/// Rank deficiency is allowed; zero diagonal entries of `R` stay zero.
pub fn householder_qr(a: &RealMatrix) -> Result<QrResult> {
    let (m, n) = a.shape();
    if m < n {
        return Err(Error::Shape(format!("householder_qr needs rows >= cols, got {m}x{n}")));
    }
    let refl = reduce(a);
    let mut q = accumulate_q(&refl, m, n);
    let mut r = refl.r.leading_block(n, n)?;
    for j in 0..n {
        if r.get(j, j) < 0.0 {
            for c in j..n {
                r.set(j, c, -r.get(j, c));
            }
            for i in 0..m {
                q.set(i, j, -q.get(i, j));
            }
        }
    }
    Ok(QrResult { q_factor: q, r_factor: r })
}

/// Full `m x m` orthogonal factor of `a` (`m >= n`), sign-normalised on the
/// first `n` columns. Used to complete orthonormal bases.
pub(crate) fn full_q(a: &RealMatrix) -> RealMatrix {
    let (m, n) = a.shape();
    let refl = reduce(a);
    let mut q = accumulate_q(&refl, m, m);
    for j in 0..n.min(m) {
        if refl.r.get(j, j) < 0.0 {
            for i in 0..m {
                q.set(i, j, -q.get(i, j));
            }
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg_matrix(rows: usize, cols: usize, mut s: u64) -> RealMatrix {
        RealMatrix::from_fn(rows, cols, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        })
    }

    #[test]
    fn identity_input() {
        let qr = householder_qr(&RealMatrix::identity(4)).unwrap();
        assert!(qr.q_factor.distance_from_identity() < 1e-15);
        assert!(qr.r_factor.distance_from_identity() < 1e-15);
    }

    #[test]
    fn unit_column() {
        let qr = householder_qr(&RealMatrix::from_rows(&[[0.0], [1.0]])).unwrap();
        assert!((qr.q_factor.get(0, 0)).abs() < 1e-15);
        assert!((qr.q_factor.get(1, 0) - 1.0).abs() < 1e-15);
        assert!((qr.r_factor.get(0, 0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_square_reconstructs() {
        let a = lcg_matrix(6, 6, 3);
        let qr = householder_qr(&a).unwrap();
        let qtq = qr.q_factor.transpose().mat_mul(&qr.q_factor).unwrap();
        assert!(qtq.distance_from_identity() < 1e-10);
        let back = qr.q_factor.mat_mul(&qr.r_factor).unwrap();
        assert!(back.sub(&a).unwrap().max_abs() < 1e-10);
        for i in 0..6 {
            assert!(qr.r_factor.get(i, i) >= 0.0);
            for j in 0..i {
                assert_eq!(qr.r_factor.get(i, j), 0.0);
            }
        }
    }

    #[test]
    fn rank_deficient_keeps_zero_diagonal() {
        let a = RealMatrix::from_rows(&[[1.0, 1.0], [1.0, 1.0], [0.0, 0.0]]);
        let qr = householder_qr(&a).unwrap();
        assert!(qr.r_factor.get(1, 1).abs() < 1e-15);
        let back = qr.q_factor.mat_mul(&qr.r_factor).unwrap();
        assert!(back.sub(&a).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn full_q_completes_basis() {
        let a = lcg_matrix(5, 2, 9);
        let q = full_q(&a);
        let qtq = q.transpose().mat_mul(&q).unwrap();
        assert!(qtq.distance_from_identity() < 1e-13);
    }

    #[test]
    fn wide_input_rejected() {
        assert!(householder_qr(&RealMatrix::zeros(2, 3)).is_err());
    }
}
