//! Dense matrix arithmetic, norms, QR, SVD and triangular solves.

mod matrix;
mod qr;
mod svd;
pub mod text;
mod triangular;

pub use matrix::{compensated_sum, dot, mat_mul, relative_residual, residual, vec_norm, RealMatrix};
pub use qr::{householder_qr, QrResult};
pub use svd::{
    condition_number, inverse_norm, jacobi_svd, min_singular_value, numerical_rank, pinv_norm,
    power_iteration_norm, singular_values, spectral_norm, SvdResult, DEFAULT_RANK_TOLERANCE,
    JACOBI_SIZE_CAP, JACOBI_TOLERANCE, MAX_SWEEPS,
};
pub use triangular::{back_substitution, forward_substitution};

/// Leading `k x l` block `A_{k,l}`.
pub fn leading_block(a: &RealMatrix, k: usize, l: usize) -> crate::Result<RealMatrix> {
    a.leading_block(k, l)
}
