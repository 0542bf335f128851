//! Recursive block Gaussian elimination.
//!
//! Each step splits the trailing matrix as `[[B, C], [D, E]]` with a
//! `d_i x d_i` pivot block `B` and replaces it by
//!
//! ```text
//! [[I, 0], [D B^-1, I]] * [[B, 0], [0, S]] * [[I, B^-1 C], [0, I]],   S = E - D B^-1 C
//! ```
//!
//! The factors are kept packed in one `n x n` array: `D B^-1` below the
//! pivot block, `B^-1 C` to its right, `B` on the diagonal.

use serde::{Deserialize, Serialize};

use super::gepp::dense_inverse;
use super::safety::{norm_pair, SafetyReport, StepRecord, SINGULAR_BLOCK_RATIO};
use super::Factorization;
use crate::dense::{back_substitution, forward_substitution, singular_values, RealMatrix};
use crate::error::{Error, Result};

/// Pivot block sizes `d_1, ..., d_r` of one elimination process.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSchedule {
    pivot_sizes: Vec<usize>,
}

impl BlockSchedule {
    pub fn new(pivot_sizes: Vec<usize>) -> Result<Self> {
        if pivot_sizes.is_empty() || pivot_sizes.contains(&0) {
            return Err(Error::InvalidArgument(format!("invalid pivot sizes {pivot_sizes:?}")));
        }
        Ok(Self { pivot_sizes })
    }

    /// `n` scalar pivots, i.e. GENP.
    pub fn scalar(n: usize) -> Self {
        Self { pivot_sizes: vec![1; n] }
    }

    pub fn uniform(n: usize, block: usize) -> Result<Self> {
        if block == 0 || n % block != 0 {
            return Err(Error::InvalidArgument(format!("block {block} does not divide {n}")));
        }
        Ok(Self { pivot_sizes: vec![block; n / block] })
    }

    pub fn pivot_sizes(&self) -> &[usize] {
        &self.pivot_sizes
    }

    pub fn total(&self) -> usize {
        self.pivot_sizes.iter().sum()
    }

    /// Starting offset of every pivot block, followed by `n`.
    pub fn boundaries(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.pivot_sizes.len() + 1);
        let mut acc = 0;
        out.push(0);
        for d in &self.pivot_sizes {
            acc += d;
            out.push(acc);
        }
        out
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockFactorization {
    pub schedule: BlockSchedule,
    packed: RealMatrix,
    pivot_inverses: Vec<RealMatrix>,
}

/// Schur complement `S(A^(k), A) = E - D B^{-1} C` of the leading `k x k` block.
pub fn schur_complement(a: &RealMatrix, k: usize) -> Result<RealMatrix> {
    let n = a.rows();
    if !a.is_square() || k == 0 || k >= n {
        return Err(Error::Shape(format!("schur complement of order {k} in {:?}", a.shape())));
    }
    let b = a.leading_block(k, k)?;
    check_pivot_block(&b, 1)?;
    let c = a.submatrix(0, k, k, n - k)?;
    let d = a.submatrix(k, 0, n - k, k)?;
    let e = a.submatrix(k, k, n - k, n - k)?;
    let binv_c = dense_inverse(&b)?.mat_mul(&c)?;
    e.sub(&d.mat_mul(&binv_c)?)
}

fn check_pivot_block(b: &RealMatrix, step: usize) -> Result<(f64, f64)> {
    let s = singular_values(b)?;
    let (top, bottom) = (s[0], *s.last().expect("nonempty"));
    if !(bottom > SINGULAR_BLOCK_RATIO * top) {
        let ratio = if top > 0.0 { bottom / top } else { 0.0 };
        return Err(Error::SingularPivotBlock { step, ratio });
    }
    Ok((top, 1.0 / bottom))
}

/// Block elimination following `schedule`, recording `||B||`, `||B^-1||`,
/// `||S||` and `||S^-1||` at every step.
pub fn block_genp_factor(a: &RealMatrix, schedule: &BlockSchedule) -> Result<(BlockFactorization, SafetyReport)> {
    if !a.is_square() {
        return Err(Error::Shape(format!("block elimination needs a square matrix, got {:?}", a.shape())));
    }
    let n = a.rows();
    if schedule.total() != n {
        return Err(Error::InvalidArgument(format!(
            "schedule sums to {} but the matrix has order {n}",
            schedule.total()
        )));
    }
    let (input_norm, _, kind) = norm_pair(a);
    let mut report = SafetyReport::new(n, input_norm, kind);
    let mut w = a.clone();
    let mut pivot_inverses = Vec::with_capacity(schedule.pivot_sizes.len());
    let mut p = 0;
    for (idx, &d) in schedule.pivot_sizes.iter().enumerate() {
        let step = idx + 1;
        let b = w.submatrix(p, p, d, d)?;
        let (b_norm, b_inv_norm) = check_pivot_block(&b, step)?;
        let b_inv = dense_inverse(&b).map_err(|_| Error::SingularPivotBlock { step, ratio: 0.0 })?;
        let rest = n - p - d;
        let mut schur = (None, None, kind);
        if rest > 0 {
            let c = w.submatrix(p, p + d, d, rest)?;
            let dd = w.submatrix(p + d, p, rest, d)?;
            let e = w.submatrix(p + d, p + d, rest, rest)?;
            let lower = dd.mat_mul(&b_inv)?;
            let upper = b_inv.mat_mul(&c)?;
            let s = e.sub(&lower.mat_mul(&c)?)?;
            w.set_block(p + d, p, &lower);
            w.set_block(p, p + d, &upper);
            w.set_block(p + d, p + d, &s);
            let (sn, sin, sk) = norm_pair(&s);
            schur = (Some(sn), Some(sin), sk);
        }
        report.push(StepRecord {
            step,
            offset: p,
            size: d,
            pivot_norm: b_norm,
            pivot_inverse_norm: b_inv_norm,
            schur_norm: schur.0,
            schur_inverse_norm: schur.1,
            norm_kind: schur.2,
        });
        pivot_inverses.push(b_inv);
        p += d;
    }
    Ok((BlockFactorization { schedule: schedule.clone(), packed: w, pivot_inverses }, report))
}

impl BlockFactorization {
    pub fn n(&self) -> usize {
        self.packed.rows()
    }

    fn block_of(&self) -> Vec<usize> {
        let mut owner = vec![0; self.n()];
        let b = self.schedule.boundaries();
        for (blk, w) in b.windows(2).enumerate() {
            owner[w[0]..w[1]].iter_mut().for_each(|o| *o = blk);
        }
        owner
    }

    /// Unit block lower triangular factor.
    pub fn lower(&self) -> RealMatrix {
        let owner = self.block_of();
        RealMatrix::from_fn(self.n(), self.n(), |i, j| {
            if i == j {
                1.0
            } else if owner[i] > owner[j] {
                self.packed.get(i, j)
            } else {
                0.0
            }
        })
    }

    /// Unit block upper triangular factor.
    pub fn upper(&self) -> RealMatrix {
        let owner = self.block_of();
        RealMatrix::from_fn(self.n(), self.n(), |i, j| {
            if i == j {
                1.0
            } else if owner[i] < owner[j] {
                self.packed.get(i, j)
            } else {
                0.0
            }
        })
    }

    /// Block diagonal factor holding the pivot blocks.
    pub fn block_diagonal(&self) -> RealMatrix {
        let owner = self.block_of();
        RealMatrix::from_fn(self.n(), self.n(), |i, j| {
            if owner[i] == owner[j] {
                self.packed.get(i, j)
            } else {
                0.0
            }
        })
    }

    pub fn pivot_blocks(&self) -> Vec<RealMatrix> {
        let b = self.schedule.boundaries();
        b.windows(2)
            .map(|w| self.packed.submatrix(w[0], w[0], w[1] - w[0], w[1] - w[0]).expect("in range"))
            .collect()
    }

    pub fn reconstruct(&self) -> RealMatrix {
        self.lower()
            .mat_mul(&self.block_diagonal())
            .and_then(|m| m.mat_mul(&self.upper()))
            .expect("square factors")
    }

    /// `S(A^(k), A)` for `k` on a block boundary, rebuilt from the trailing
    /// parts of the factors. `None` for `k = n`.
    pub fn schur_complement_at(&self, k: usize) -> Result<Option<RealMatrix>> {
        let n = self.n();
        if !self.schedule.boundaries().contains(&k) || k == 0 {
            return Err(Error::InvalidArgument(format!("{k} is not a block boundary of the schedule")));
        }
        if k == n {
            return Ok(None);
        }
        let r = n - k;
        let l = self.lower().submatrix(k, k, r, r)?;
        let d = self.block_diagonal().submatrix(k, k, r, r)?;
        let u = self.upper().submatrix(k, k, r, r)?;
        Ok(Some(l.mat_mul(&d)?.mat_mul(&u)?))
    }

    /// `A^{-1} = U^{-1} diag(B_i^{-1}) L^{-1}`, the inverted factorization.
    pub fn inverse(&self) -> Result<RealMatrix> {
        let n = self.n();
        let l = self.lower();
        let u = self.upper();
        let mut l_inv = RealMatrix::zeros(n, n);
        let mut u_inv = RealMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            let x = forward_substitution(&l, &e, true)?;
            let y = back_substitution(&u, &e)?;
            for i in 0..n {
                l_inv.set(i, j, x[i]);
                u_inv.set(i, j, y[i]);
            }
        }
        let mut d_inv = RealMatrix::zeros(n, n);
        for (w, inv) in self.schedule.boundaries().windows(2).zip(&self.pivot_inverses) {
            d_inv.set_block(w[0], w[0], inv);
        }
        u_inv.mat_mul(&d_inv)?.mat_mul(&l_inv)
    }
}

impl Factorization for BlockFactorization {
    fn dim(&self) -> usize {
        self.n()
    }

    fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let y = forward_substitution(&self.lower(), b, true)?;
        let mut z = vec![0.0; y.len()];
        for (w, inv) in self.schedule.boundaries().windows(2).zip(&self.pivot_inverses) {
            let part = inv.mat_vec(&y[w[0]..w[1]])?;
            z[w[0]..w[1]].copy_from_slice(&part);
        }
        back_substitution(&self.upper(), &z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd(n: usize, seed: u64) -> RealMatrix {
        let mut s = seed;
        let g = RealMatrix::from_fn(n, n, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        });
        g.transpose().mat_mul(&g).unwrap().add(&RealMatrix::identity(n)).unwrap()
    }

    #[test]
    fn single_step_schedule() {
        let a = spd(5, 1);
        let (f, report) = block_genp_factor(&a, &BlockSchedule::new(vec![5]).unwrap()).unwrap();
        assert_eq!(report.steps.len(), 1);
        assert!(report.steps[0].schur_norm.is_none());
        assert!(f.schur_complement_at(5).unwrap().is_none());
        assert!(f.reconstruct().sub(&a).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn scalar_schur_by_hand() {
        let a = RealMatrix::from_rows(&[[2.0, 1.0], [1.0, 1.0]]);
        let (f, _) = block_genp_factor(&a, &BlockSchedule::scalar(2)).unwrap();
        let s = f.schur_complement_at(1).unwrap().unwrap();
        assert!((s.get(0, 0) - 0.5).abs() < 1e-15);
        assert!((schur_complement(&a, 1).unwrap().get(0, 0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn block_diagonal_schur_is_trailing_block() {
        let b = RealMatrix::from_rows(&[[2.0, 0.5], [0.1, 3.0]]);
        let e = RealMatrix::from_rows(&[[1.0, 4.0], [-2.0, 7.0]]);
        let z = RealMatrix::zeros(2, 2);
        let a = RealMatrix::from_blocks(&b, &z, &z, &e).unwrap();
        assert_eq!(schur_complement(&a, 2).unwrap(), e);
    }

    #[test]
    fn singular_pivot_block_reported() {
        let a = RealMatrix::from_rows(&[[1.0, 1.0, 0.0], [1.0, 1.0, 1.0], [0.0, 1.0, 1.0]]);
        match block_genp_factor(&a, &BlockSchedule::new(vec![2, 1]).unwrap()) {
            Err(Error::SingularPivotBlock { step, .. }) => assert_eq!(step, 1),
            other => panic!("expected singular pivot block, got {other:?}"),
        }
    }

    #[test]
    fn schedule_validation() {
        assert!(BlockSchedule::new(vec![]).is_err());
        assert!(BlockSchedule::new(vec![2, 0]).is_err());
        assert!(BlockSchedule::uniform(10, 4).is_err());
        let a = spd(4, 2);
        assert!(block_genp_factor(&a, &BlockSchedule::new(vec![1, 2]).unwrap()).is_err());
    }

    #[test]
    fn solve_and_inverse() {
        let a = spd(8, 3);
        let (f, _) = block_genp_factor(&a, &BlockSchedule::new(vec![3, 1, 4]).unwrap()).unwrap();
        let x_true: Vec<f64> = (0..8).map(|i| i as f64 - 3.5).collect();
        let b = a.mat_vec(&x_true).unwrap();
        let x = f.solve(&b).unwrap();
        for (u, v) in x.iter().zip(&x_true) {
            assert!((u - v).abs() < 1e-10);
        }
        let prod = a.mat_mul(&f.inverse().unwrap()).unwrap();
        assert!(prod.distance_from_identity() < 1e-10);
    }
}
