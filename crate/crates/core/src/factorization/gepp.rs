use serde::{Deserialize, Serialize};

use super::Factorization;
use crate::dense::{back_substitution, forward_substitution, RealMatrix};
use crate::error::{Error, Result};

/// Candidate pivots below this magnitude mean the matrix is singular.
pub const GEPP_SINGULAR_PIVOT: f64 = 1e-300;

/// `P A = L U` with `|l_ij| <= 1`; `permutation[i]` is the row of `A`
/// that ends up in position `i`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeppFactorization {
    pub permutation: Vec<usize>,
    pub l_factor: RealMatrix,
    pub u_factor: RealMatrix,
}

pub fn gepp_factor(a: &RealMatrix) -> Result<GeppFactorization> {
    if !a.is_square() {
        return Err(Error::Shape(format!("GEPP needs a square matrix, got {:?}", a.shape())));
    }
    let n = a.rows();
    let mut w = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (p, best) = (k..n)
            .map(|i| (i, w.get(i, k).abs()))
            .fold((k, -1.0), |acc, c| if c.1 > acc.1 { c } else { acc });
        if !(best >= GEPP_SINGULAR_PIVOT) {
            return Err(Error::Singular { sigma_min: best.max(0.0) });
        }
        if p != k {
            let data = w.as_mut_slice();
            let (lo, hi) = data.split_at_mut(p * n);
            lo[k * n..(k + 1) * n].swap_with_slice(&mut hi[..n]);
            perm.swap(k, p);
        }
        let data = w.as_mut_slice();
        let (head, tail) = data.split_at_mut((k + 1) * n);
        let pivot_row = &head[k * n..(k + 1) * n];
        let pivot = pivot_row[k];
        for row in tail.chunks_exact_mut(n) {
            let l = row[k] / pivot;
            row[k] = l;
            if l != 0.0 {
                for (x, &pv) in row[k + 1..].iter_mut().zip(&pivot_row[k + 1..]) {
                    *x -= l * pv;
                }
            }
        }
    }
    let l = RealMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Greater => w.get(i, j),
        std::cmp::Ordering::Equal => 1.0,
        std::cmp::Ordering::Less => 0.0,
    });
    let u = RealMatrix::from_fn(n, n, |i, j| if j >= i { w.get(i, j) } else { 0.0 });
    Ok(GeppFactorization { permutation: perm, l_factor: l, u_factor: u })
}

impl GeppFactorization {
    pub fn permuted(&self, a: &RealMatrix) -> RealMatrix {
        RealMatrix::from_fn(a.rows(), a.cols(), |i, j| a.get(self.permutation[i], j))
    }
}

impl Factorization for GeppFactorization {
    fn dim(&self) -> usize {
        self.permutation.len()
    }

    fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.dim() {
            return Err(Error::Shape(format!("rhs length {} for order {}", b.len(), self.dim())));
        }
        let pb: Vec<f64> = self.permutation.iter().map(|&i| b[i]).collect();
        let y = forward_substitution(&self.l_factor, &pb, true)?;
        back_substitution(&self.u_factor, &y)
    }
}

/// Dense inverse through GEPP, one solve per column.
pub fn dense_inverse(a: &RealMatrix) -> Result<RealMatrix> {
    let f = gepp_factor(a)?;
    let n = a.rows();
    let mut inv = RealMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[j] = 1.0;
        let x = f.solve(&e)?;
        for (i, v) in x.into_iter().enumerate() {
            inv.set(i, j, v);
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn swaps_rows_of_antidiagonal() {
        let a = RealMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]);
        let f = gepp_factor(&a).unwrap();
        assert_eq!(f.permutation, vec![1, 0]);
        assert_eq!(f.l_factor, RealMatrix::identity(2));
        assert_eq!(f.u_factor, RealMatrix::identity(2));
    }

    #[test]
    fn diagonal_keeps_identity_permutation() {
        let a = RealMatrix::diag(&[1.0, 2.0, 3.0, 4.0]);
        let f = gepp_factor(&a).unwrap();
        assert_eq!(f.permutation, vec![0, 1, 2, 3]);
    }

    #[test]
    fn singular_is_reported() {
        let a = RealMatrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]);
        assert!(matches!(gepp_factor(&a), Err(Error::Singular { .. })));
    }

    #[test]
    fn inverse_of_small_matrix() {
        let a = RealMatrix::from_rows(&[[4.0, 7.0], [2.0, 6.0]]);
        let inv = dense_inverse(&a).unwrap();
        let prod = a.mat_mul(&inv).unwrap();
        assert!(prod.distance_from_identity() < 1e-15);
    }
}
