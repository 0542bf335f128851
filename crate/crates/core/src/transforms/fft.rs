use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Real flops per radix-2 butterfly: one complex multiply and two adds.
pub const BUTTERFLY_FLOPS: u64 = 10;
/// Real flops per complex multiply.
pub const COMPLEX_MUL_FLOPS: u64 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    /// Includes the `1/n` normalisation.
    Inverse,
}

/// Complex samples; the radix-2 kernel needs a power-of-two length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexVector(pub Vec<Complex64>);

impl ComplexVector {
    pub fn from_real(values: &[f64]) -> Self {
        Self(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// Pairs `(re, im)`.
    pub fn from_interleaved(values: &[f64]) -> Result<Self> {
        if values.len() % 2 != 0 {
            return Err(Error::Shape(format!("odd interleaved length {}", values.len())));
        }
        let v: Vec<Complex64> = values.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
        let out = Self(v);
        if !out.is_finite() {
            return Err(Error::InvalidArgument("non-finite complex entry".into()));
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn energy(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }
}

/// Running count of real floating-point operations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlopCounter {
    pub flops: u64,
}

impl FlopCounter {
    pub fn add(&mut self, n: u64) {
        self.flops += n;
    }
}

/// Twiddle factors and bit-reversal table for one transform length.
#[derive(Debug, Clone)]
pub struct FftPlan {
    n: usize,
    log2: u32,
    twiddles: Vec<Complex64>,
    reversal: Vec<usize>,
}

impl FftPlan {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        let log2 = n.trailing_zeros();
        let twiddles = (0..n / 2)
            .map(|k| Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * k as f64 / n as f64))
            .collect();
        let reversal = (0..n)
            .map(|i| if log2 == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - log2) })
            .collect();
        Ok(Self { n, log2, twiddles, reversal })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// In-place transform of `buf`, which must have the plan's length.
    pub fn transform(&self, buf: &mut [Complex64], dir: Direction, counter: &mut FlopCounter) {
        assert_eq!(buf.len(), self.n, "buffer length must match the plan");
        let n = self.n;
        for i in 0..n {
            let j = self.reversal[i];
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut half = 1;
        for _ in 0..self.log2 {
            let stride = n / (2 * half);
            for start in (0..n).step_by(2 * half) {
                for k in 0..half {
                    let mut w = self.twiddles[k * stride];
                    if dir == Direction::Inverse {
                        w = w.conj();
                    }
                    let t = w * buf[start + k + half];
                    let u = buf[start + k];
                    buf[start + k] = u + t;
                    buf[start + k + half] = u - t;
                }
            }
            counter.add(BUTTERFLY_FLOPS * (n as u64 / 2));
            half *= 2;
        }
        if dir == Direction::Inverse {
            let scale = 1.0 / n as f64;
            for z in buf.iter_mut() {
                *z *= scale;
            }
            counter.add(2 * n as u64);
        }
    }
}

/// Radix-2 FFT; the inverse direction divides by the length.
pub fn fft(v: &ComplexVector, dir: Direction) -> Result<ComplexVector> {
    let plan = FftPlan::new(v.len())?;
    let mut buf = v.0.clone();
    plan.transform(&mut buf, dir, &mut FlopCounter::default());
    Ok(ComplexVector(buf))
}
