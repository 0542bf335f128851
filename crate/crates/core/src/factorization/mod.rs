//! GENP, GEPP and recursive block Gaussian elimination.

mod block;
mod genp;
mod gepp;
mod safety;

pub use block::{block_genp_factor, schur_complement, BlockFactorization, BlockSchedule};
pub use genp::{genp_factor, genp_factor_with, GenpFactorization, GenpOptions};
pub use gepp::{dense_inverse, gepp_factor, GeppFactorization, GEPP_SINGULAR_PIVOT};
pub use safety::{
    max_leading_inverse_norm, safety_check, MonitorLevel, NormKind, SafetyOutcome, SafetyReport,
    SafetyVerdict, SafetyViolation, StepRecord, BOUND_SLACK, FULL_INVERSE_SCAN_LIMIT,
    SINGULAR_BLOCK_RATIO, SPECTRAL_MONITOR_LIMIT,
};

use crate::error::{Error, Result};

/// A factorization that can solve `A x = b`.
pub trait Factorization {
    fn dim(&self) -> usize;
    fn solve(&self, b: &[f64]) -> Result<Vec<f64>>;
}

/// Forward and back substitution through any factorization.
pub fn lu_solve<F: Factorization + ?Sized>(fact: &F, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != fact.dim() {
        return Err(Error::Shape(format!("rhs length {} for order {}", b.len(), fact.dim())));
    }
    fact.solve(b)
}
