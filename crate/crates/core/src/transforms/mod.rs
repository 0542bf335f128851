//! Radix-2 FFT and fast circulant, Toeplitz and Hankel products.
//!
//! An `n x n` circulant is diagonalised by the DFT, so `C a` costs two
//! transforms and one pointwise product per column. Toeplitz matrices are
//! embedded in a circulant of power-of-two order at least `m + n - 1`.
//! Flops can be counted with a [`FlopCounter`].

mod fft;
mod structured;

pub use fft::{fft, ComplexVector, Direction, FftPlan, FlopCounter, BUTTERFLY_FLOPS, COMPLEX_MUL_FLOPS};
pub use structured::{CirculantOperator, Side, StructureKind, ToeplitzOperator, MATERIALIZE_CAP};
