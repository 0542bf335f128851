use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense real matrix stored row-major: entry `(i, j)` lives at `i * cols + j`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for RealMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RealMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            write!(f, "  ")?;
            for v in self.row(i).iter().take(8) {
                write!(f, "{v:>12.4e} ")?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl RealMatrix {
    /// Builds a matrix from row-major entries, checking shape and finiteness.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape(format!("empty matrix {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "expected {} entries for {rows}x{cols}, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite entry at ({}, {})",
                pos / cols,
                pos % cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Unchecked constructor for results of internal arithmetic.
    pub(crate) fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    /// # Panics
    /// Panics on ragged or empty input; meant for literals in tests and examples.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        assert!(!rows.is_empty(), "at least one row required");
        let cols = rows[0].as_ref().len();
        assert!(cols > 0, "at least one column required");
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.as_ref().len(), cols, "ragged rows");
            data.extend_from_slice(r.as_ref());
        }
        Self::from_vec(rows.len(), cols, data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::from_vec(rows, cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_vec(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        m
    }

    pub fn column_vector(values: &[f64]) -> Self {
        Self::from_vec(values.len(), 1, values.to_vec())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Self {
        let mut out = vec![0.0; self.data.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        Self::from_vec(self.cols, self.rows, out)
    }

    /// Standard product `self * rhs`.
    pub fn mat_mul(&self, rhs: &RealMatrix) -> Result<RealMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let n = rhs.cols;
        let mut out = vec![0.0; self.rows * n];
        for i in 0..self.rows {
            let acc = &mut out[i * n..(i + 1) * n];
            for (k, &aik) in self.row(i).iter().enumerate() {
                if aik == 0.0 {
                    continue;
                }
                for (o, &b) in acc.iter_mut().zip(rhs.row(k)) {
                    *o += aik * b;
                }
            }
        }
        Ok(Self::from_vec(self.rows, n, out))
    }

    pub fn mat_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn add(&self, rhs: &RealMatrix) -> Result<RealMatrix> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &RealMatrix) -> Result<RealMatrix> {
        self.zip_with(rhs, |a, b| a - b)
    }

    fn zip_with(&self, rhs: &RealMatrix, f: impl Fn(f64, f64) -> f64) -> Result<RealMatrix> {
        if self.shape() != rhs.shape() {
            return Err(Error::Shape(format!(
                "shape mismatch {}x{} vs {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let data = self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self::from_vec(self.rows, self.cols, data))
    }

    pub fn scale(&self, s: f64) -> RealMatrix {
        Self::from_vec(self.rows, self.cols, self.data.iter().map(|v| v * s).collect())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Contiguous `rows x cols` block starting at `(r0, c0)`.
    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Result<RealMatrix> {
        if rows == 0 || cols == 0 || r0 + rows > self.rows || c0 + cols > self.cols {
            return Err(Error::Shape(format!(
                "block {rows}x{cols} at ({r0}, {c0}) out of range for {}x{}",
                self.rows, self.cols
            )));
        }
        let mut data = Vec::with_capacity(rows * cols);
        for i in r0..r0 + rows {
            data.extend_from_slice(&self.row(i)[c0..c0 + cols]);
        }
        Ok(Self::from_vec(rows, cols, data))
    }

    /// Leading (northwestern) `k x l` block.
    pub fn leading_block(&self, k: usize, l: usize) -> Result<RealMatrix> {
        self.submatrix(0, 0, k, l)
    }

    pub(crate) fn set_block(&mut self, r0: usize, c0: usize, block: &RealMatrix) {
        for i in 0..block.rows {
            let cols = block.cols;
            self.row_mut(r0 + i)[c0..c0 + cols].copy_from_slice(block.row(i));
        }
    }

    /// Assembles `[[a, b], [c, d]]`.
    pub fn from_blocks(
        a: &RealMatrix,
        b: &RealMatrix,
        c: &RealMatrix,
        d: &RealMatrix,
    ) -> Result<RealMatrix> {
        if a.rows != b.rows || c.rows != d.rows || a.cols != c.cols || b.cols != d.cols {
            return Err(Error::Shape("inconsistent block partition".into()));
        }
        let mut m = Self::zeros(a.rows + c.rows, a.cols + b.cols);
        m.set_block(0, 0, a);
        m.set_block(0, a.cols, b);
        m.set_block(a.rows, 0, c);
        m.set_block(a.rows, a.cols, d);
        Ok(m)
    }

    /// Reverses row order (`J * self`).
    pub fn flip_rows(&self) -> RealMatrix {
        let mut data = Vec::with_capacity(self.data.len());
        for i in (0..self.rows).rev() {
            data.extend_from_slice(self.row(i));
        }
        Self::from_vec(self.rows, self.cols, data)
    }

    /// Reverses column order (`self * J`).
    pub fn flip_cols(&self) -> RealMatrix {
        let mut out = self.clone();
        for i in 0..self.rows {
            out.row_mut(i).reverse();
        }
        out
    }

    /// Largest absolute deviation from the identity.
    pub fn distance_from_identity(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((self.get(i, j) - target).abs());
            }
        }
        worst
    }
}

/// Product `a * b`; free-function form of [`RealMatrix::mat_mul`].
pub fn mat_mul(a: &RealMatrix, b: &RealMatrix) -> Result<RealMatrix> {
    a.mat_mul(b)
}

/// Euclidean norm with scaling against overflow.
pub fn vec_norm(x: &[f64]) -> f64 {
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    scale * x.iter().map(|v| (v / scale).powi(2)).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Neumaier-compensated sum.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `b - A x` with every row accumulated by compensated summation.
pub fn residual(a: &RealMatrix, x: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if a.cols() != x.len() || a.rows() != b.len() {
        return Err(Error::Shape(format!(
            "residual of {}x{} system with x of length {} and b of length {}",
            a.rows(),
            a.cols(),
            x.len(),
            b.len()
        )));
    }
    Ok((0..a.rows())
        .map(|i| {
            let terms = a.row(i).iter().zip(x).map(|(aij, xj)| -aij * xj);
            compensated_sum(std::iter::once(b[i]).chain(terms))
        })
        .collect())
}

/// `||A x - b|| / ||b||`, computed from scratch against the given system.
pub fn relative_residual(a: &RealMatrix, x: &[f64], b: &[f64]) -> Result<f64> {
    let r = residual(a, x, b)?;
    let bn = vec_norm(b);
    if bn == 0.0 {
        return Ok(vec_norm(&r));
    }
    Ok(vec_norm(&r) / bn)
}
