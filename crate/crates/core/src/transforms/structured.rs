use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fft::{Direction, FftPlan, FlopCounter, COMPLEX_MUL_FLOPS};
use crate::dense::RealMatrix;
use crate::error::{Error, Result};

/// Largest order `materialize` will build.
pub const MATERIALIZE_CAP: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `op * a`
    Left,
    /// `a * op`
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StructureKind {
    Toeplitz,
    /// Toeplitz with the row order reversed.
    Hankel,
}

/// Circular convolution of every column of `a` (zero-padded to the plan
/// length) with the sequence whose DFT is `spectrum`. Two real columns
/// share one complex transform since the kernel is real.
fn convolve_columns(
    plan: &FftPlan,
    spectrum: &[Complex64],
    conjugate: bool,
    a: &RealMatrix,
    out_rows: usize,
    counter: &mut FlopCounter,
) -> RealMatrix {
    let len = plan.len();
    let (rows, cols) = a.shape();
    debug_assert!(rows <= len && out_rows <= len);
    let mut out = RealMatrix::zeros(out_rows, cols);
    let mut buf = vec![Complex64::default(); len];
    let mut j = 0;
    while j < cols {
        let paired = j + 1 < cols;
        buf.iter_mut().for_each(|z| *z = Complex64::default());
        for i in 0..rows {
            let im = if paired { a.get(i, j + 1) } else { 0.0 };
            buf[i] = Complex64::new(a.get(i, j), im);
        }
        plan.transform(&mut buf, Direction::Forward, counter);
        for (z, s) in buf.iter_mut().zip(spectrum) {
            *z *= if conjugate { s.conj() } else { *s };
        }
        counter.add(COMPLEX_MUL_FLOPS * len as u64);
        plan.transform(&mut buf, Direction::Inverse, counter);
        for i in 0..out_rows {
            out.set(i, j, buf[i].re);
            if paired {
                out.set(i, j + 1, buf[i].im);
            }
        }
        j += 2;
    }
    out
}

fn spectrum_of(plan: &FftPlan, column: &[f64]) -> Vec<Complex64> {
    let mut buf = vec![Complex64::default(); plan.len()];
    for (z, &c) in buf.iter_mut().zip(column) {
        *z = Complex64::new(c, 0.0);
    }
    plan.transform(&mut buf, Direction::Forward, &mut FlopCounter::default());
    buf
}

fn check_coefficients(v: &[f64], what: &str) -> Result<()> {
    if v.is_empty() {
        return Err(Error::Shape(format!("{what} is empty")));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument(format!("{what} has a non-finite entry")));
    }
    Ok(())
}

/// `C = (c_{(i-j) mod n})`, stored by its first column.
#[derive(Debug, Clone)]
pub struct CirculantOperator {
    first_column: Vec<f64>,
    /// Present only for power-of-two orders.
    plan: Option<(FftPlan, Vec<Complex64>)>,
}

impl CirculantOperator {
    pub fn new(first_column: Vec<f64>) -> Result<Self> {
        check_coefficients(&first_column, "circulant column")?;
        let plan = FftPlan::new(first_column.len()).ok().map(|p| {
            let s = spectrum_of(&p, &first_column);
            (p, s)
        });
        Ok(Self { first_column, plan })
    }

    pub fn n(&self) -> usize {
        self.first_column.len()
    }

    pub fn first_column(&self) -> &[f64] {
        &self.first_column
    }

    /// DFT of the first column (the eigenvalues), if the order allows it.
    pub fn spectrum(&self) -> Option<&[Complex64]> {
        self.plan.as_ref().map(|(_, s)| s.as_slice())
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let n = self.n();
        self.first_column[(i + n - j % n) % n]
    }

    pub fn materialize(&self) -> Result<RealMatrix> {
        let n = self.n();
        if n > MATERIALIZE_CAP {
            return Err(Error::SizeCap { size: n, cap: MATERIALIZE_CAP });
        }
        Ok(RealMatrix::from_fn(n, n, |i, j| self.entry(i, j)))
    }

    pub fn apply(&self, a: &RealMatrix, side: Side) -> Result<RealMatrix> {
        self.apply_counted(a, side, &mut FlopCounter::default())
    }

    pub fn apply_counted(&self, a: &RealMatrix, side: Side, counter: &mut FlopCounter) -> Result<RealMatrix> {
        let n = self.n();
        let (plan, spectrum) = self.plan.as_ref().ok_or(Error::NotPowerOfTwo(n))?;
        match side {
            Side::Left => {
                if a.rows() != n {
                    return Err(Error::Shape(format!("circulant of order {n} times {:?}", a.shape())));
                }
                Ok(convolve_columns(plan, spectrum, false, a, n, counter))
            }
            Side::Right => {
                if a.cols() != n {
                    return Err(Error::Shape(format!("{:?} times circulant of order {n}", a.shape())));
                }
                // a C = (C^T a^T)^T and C^T has the conjugate spectrum
                let t = convolve_columns(plan, spectrum, true, &a.transpose(), n, counter);
                Ok(t.transpose())
            }
        }
    }

    pub fn apply_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.apply(&RealMatrix::column_vector(x), Side::Left)?.into_vec())
    }
}

/// An `m x n` Toeplitz matrix (or its row-reversed Hankel form), applied
/// through a circulant embedding of power-of-two length `>= m + n - 1`.
#[derive(Debug, Clone)]
pub struct ToeplitzOperator {
    first_column: Vec<f64>,
    first_row: Vec<f64>,
    kind: StructureKind,
    plan: FftPlan,
    spectrum: Vec<Complex64>,
}

impl ToeplitzOperator {
    /// `first_column` and `first_row` describe the Toeplitz part `T`; the
    /// Hankel kind is `J T` with `J` the row reversal.
    pub fn new(first_column: Vec<f64>, first_row: Vec<f64>, kind: StructureKind) -> Result<Self> {
        check_coefficients(&first_column, "Toeplitz column")?;
        check_coefficients(&first_row, "Toeplitz row")?;
        if first_column[0] != first_row[0] {
            return Err(Error::InvalidArgument(format!(
                "first column and row disagree at (0,0): {} vs {}",
                first_column[0], first_row[0]
            )));
        }
        let (m, n) = (first_column.len(), first_row.len());
        let len = (m + n - 1).next_power_of_two();
        let plan = FftPlan::new(len)?;
        let mut embedding = vec![0.0; len];
        embedding[..m].copy_from_slice(&first_column);
        for j in 1..n {
            embedding[len - j] = first_row[j];
        }
        let spectrum = spectrum_of(&plan, &embedding);
        Ok(Self { first_column, first_row, kind, plan, spectrum })
    }

    pub fn rows(&self) -> usize {
        self.first_column.len()
    }

    pub fn cols(&self) -> usize {
        self.first_row.len()
    }

    pub fn kind(&self) -> StructureKind {
        self.kind
    }

    pub fn first_column(&self) -> &[f64] {
        &self.first_column
    }

    pub fn first_row(&self) -> &[f64] {
        &self.first_row
    }

    pub fn embedding_len(&self) -> usize {
        self.plan.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let i = match self.kind {
            StructureKind::Toeplitz => i,
            StructureKind::Hankel => self.rows() - 1 - i,
        };
        if i >= j {
            self.first_column[i - j]
        } else {
            self.first_row[j - i]
        }
    }

    pub fn materialize(&self) -> Result<RealMatrix> {
        let size = self.rows().max(self.cols());
        if size > MATERIALIZE_CAP {
            return Err(Error::SizeCap { size, cap: MATERIALIZE_CAP });
        }
        Ok(RealMatrix::from_fn(self.rows(), self.cols(), |i, j| self.entry(i, j)))
    }

    pub fn apply(&self, a: &RealMatrix, side: Side) -> Result<RealMatrix> {
        self.apply_counted(a, side, &mut FlopCounter::default())
    }

    pub fn apply_counted(&self, a: &RealMatrix, side: Side, counter: &mut FlopCounter) -> Result<RealMatrix> {
        let (m, n) = (self.rows(), self.cols());
        match side {
            Side::Left => {
                if a.rows() != n {
                    return Err(Error::Shape(format!("{m}x{n} operator times {:?}", a.shape())));
                }
                let out = convolve_columns(&self.plan, &self.spectrum, false, a, m, counter);
                Ok(match self.kind {
                    StructureKind::Toeplitz => out,
                    StructureKind::Hankel => out.flip_rows(),
                })
            }
            Side::Right => {
                if a.cols() != m {
                    return Err(Error::Shape(format!("{:?} times {m}x{n} operator", a.shape())));
                }
                let at = match self.kind {
                    StructureKind::Toeplitz => a.transpose(),
                    StructureKind::Hankel => a.flip_cols().transpose(),
                };
                let t = convolve_columns(&self.plan, &self.spectrum, true, &at, n, counter);
                Ok(t.transpose())
            }
        }
    }

    pub fn apply_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.apply(&RealMatrix::column_vector(x), Side::Left)?.into_vec())
    }
}
