//! Dense linear algebra for Gaussian elimination with no pivoting (GENP),
//! stabilised by Gaussian and structured random multipliers.
//!
//! The crate is organised bottom-up:
//!
//! - [`dense`]: row-major matrices, one-sided Jacobi SVD, Householder QR,
//!   norms and triangular solves.
//! - [`factorization`]: GENP, GEPP and recursive block elimination, with a
//!   pivot monitor and the local-safety bound check.
//! - [`transforms`]: radix-2 FFT and fast circulant/Toeplitz/Hankel products.
//! - [`randgen`]: seeded samplers for every random object used here.
//! - [`testgen`]: nonsingular systems whose leading half block is singular.
//! - [`pipeline`]: the preconditioned solve `FAHy = Fb`, `x = Hy`, plus
//!   iterative refinement.
//! - [`harness`]: residual experiments and verification suites.

pub mod dense;
pub mod error;
pub mod factorization;
pub mod harness;
pub mod pipeline;
pub mod randgen;
pub mod testgen;
pub mod transforms;

pub use dense::RealMatrix;
pub use error::{Error, Result};
