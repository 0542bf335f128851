//! Preconditioned GENP: factor `F A H`, solve `F A H y = F b`, return
//! `x = H y`, then optionally refine against the original system.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dense::{relative_residual, residual, RealMatrix};
use crate::error::{Error, Result};
use crate::factorization::{genp_factor_with, Factorization, GenpFactorization, GenpOptions, SafetyReport};
use crate::randgen::{finite_set_matrix, gaussian_matrix, gaussian_toeplitz, FiniteSet, MatrixKind, Seed};
use crate::transforms::{CirculantOperator, Side, StructureKind, ToeplitzOperator};

/// Structured multipliers of at least this order are applied by FFT.
pub const FAST_APPLY_MIN_ORDER: usize = 128;
/// Default finite set `{-1000, ..., 1000}` for finite-set multipliers.
pub const DEFAULT_FINITE_SET_BOUND: i64 = 1000;

const TAG_LEFT: u64 = 101;
const TAG_RIGHT: u64 = 102;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Multiplier {
    None,
    Gaussian,
    Circulant,
    Toeplitz,
    Hankel,
    /// Entries uniform over `{lo, ..., hi}`.
    FiniteSet { lo: i64, hi: i64 },
}

impl Multiplier {
    pub fn default_finite_set() -> Self {
        Multiplier::FiniteSet { lo: -DEFAULT_FINITE_SET_BOUND, hi: DEFAULT_FINITE_SET_BOUND }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Multiplier::None => "none",
            Multiplier::Gaussian => "gaussian",
            Multiplier::Circulant => "circulant",
            Multiplier::Toeplitz => "toeplitz",
            Multiplier::Hankel => "hankel",
            Multiplier::FiniteSet { .. } => "finite-set",
        }
    }
}

impl FromStr for Multiplier {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "none" => Multiplier::None,
            "gaussian" => Multiplier::Gaussian,
            "circulant" => Multiplier::Circulant,
            "toeplitz" => Multiplier::Toeplitz,
            "hankel" => Multiplier::Hankel,
            "finite-set" => Multiplier::default_finite_set(),
            other => return Err(Error::Parse(format!("unknown multiplier {other:?}"))),
        })
    }
}

impl std::fmt::Display for Multiplier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreconditionPlan {
    /// `F`
    pub left: Multiplier,
    /// `H`
    pub right: Multiplier,
    pub refinement_steps: usize,
    pub zero_pivot_threshold: f64,
}

/// Gaussian `F`, no `H`.
impl Default for PreconditionPlan {
    fn default() -> Self {
        Self::new(Multiplier::Gaussian, Multiplier::None)
    }
}

impl PreconditionPlan {
    pub fn new(left: Multiplier, right: Multiplier) -> Self {
        Self { left, right, refinement_steps: 0, zero_pivot_threshold: 0.0 }
    }

    /// Plain GENP.
    pub fn identity() -> Self {
        Self::new(Multiplier::None, Multiplier::None)
    }

    pub fn two_sided(kind: Multiplier) -> Self {
        Self::new(kind.clone(), kind)
    }

    pub fn with_refinement(mut self, steps: usize) -> Self {
        self.refinement_steps = steps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.zero_pivot_threshold >= 0.0) {
            return Err(Error::InvalidArgument("zero_pivot_threshold must be nonnegative".into()));
        }
        for m in [&self.left, &self.right] {
            if let Multiplier::FiniteSet { lo, hi } = m {
                FiniteSet::range(*lo, *hi)?;
            }
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        format!("{}/{}", self.left, self.right)
    }
}

/// A multiplier ready to apply.
#[derive(Debug, Clone)]
pub enum MultiplierOperator {
    Identity,
    Dense(RealMatrix),
    Circulant(CirculantOperator),
    Toeplitz(ToeplitzOperator),
}

impl MultiplierOperator {
    /// Draws an `n x n` multiplier; structured kinds below
    /// [`FAST_APPLY_MIN_ORDER`] (or of non-power-of-two order) are dense.
    pub fn build(kind: &Multiplier, seed: Seed, n: usize) -> Result<Self> {
        let fast = n >= FAST_APPLY_MIN_ORDER && n.is_power_of_two();
        let structured = |op: MultiplierOperator| -> Result<MultiplierOperator> {
            if fast {
                Ok(op)
            } else {
                Ok(MultiplierOperator::Dense(op.materialize(n)?))
            }
        };
        match kind {
            Multiplier::None => Ok(MultiplierOperator::Identity),
            Multiplier::Gaussian => Ok(MultiplierOperator::Dense(gaussian_matrix(seed, n, n)?)),
            Multiplier::Circulant => {
                let op = CirculantOperator::new(seed.sampler().normals(n))?;
                structured(MultiplierOperator::Circulant(op))
            }
            Multiplier::Toeplitz | Multiplier::Hankel => {
                let sk = if *kind == Multiplier::Toeplitz { StructureKind::Toeplitz } else { StructureKind::Hankel };
                structured(MultiplierOperator::Toeplitz(gaussian_toeplitz(seed, n, n, sk)?))
            }
            Multiplier::FiniteSet { lo, hi } => {
                let delta = FiniteSet::range(*lo, *hi)?;
                Ok(MultiplierOperator::Dense(finite_set_matrix(seed, n, n, &delta, MatrixKind::Dense)?))
            }
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, MultiplierOperator::Identity)
    }

    pub fn materialize(&self, n: usize) -> Result<RealMatrix> {
        match self {
            MultiplierOperator::Identity => Ok(RealMatrix::identity(n)),
            MultiplierOperator::Dense(m) => Ok(m.clone()),
            MultiplierOperator::Circulant(c) => c.materialize(),
            MultiplierOperator::Toeplitz(t) => t.materialize(),
        }
    }

    /// `op * a`
    pub fn left(&self, a: &RealMatrix) -> Result<RealMatrix> {
        match self {
            MultiplierOperator::Identity => Ok(a.clone()),
            MultiplierOperator::Dense(m) => m.mat_mul(a),
            MultiplierOperator::Circulant(c) => c.apply(a, Side::Left),
            MultiplierOperator::Toeplitz(t) => t.apply(a, Side::Left),
        }
    }

    /// `a * op`
    pub fn right(&self, a: &RealMatrix) -> Result<RealMatrix> {
        match self {
            MultiplierOperator::Identity => Ok(a.clone()),
            MultiplierOperator::Dense(m) => a.mat_mul(m),
            MultiplierOperator::Circulant(c) => c.apply(a, Side::Right),
            MultiplierOperator::Toeplitz(t) => t.apply(a, Side::Right),
        }
    }

    pub fn apply_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            MultiplierOperator::Identity => Ok(x.to_vec()),
            MultiplierOperator::Dense(m) => m.mat_vec(x),
            MultiplierOperator::Circulant(c) => c.apply_vec(x),
            MultiplierOperator::Toeplitz(t) => t.apply_vec(x),
        }
    }
}

/// `F`, `H` and the GENP factors of `F A H`.
#[derive(Debug, Clone)]
pub struct PreconditionedSystem {
    pub left: MultiplierOperator,
    pub right: MultiplierOperator,
    pub factorization: GenpFactorization,
    pub safety: SafetyReport,
}

impl PreconditionedSystem {
    pub fn build(a: &RealMatrix, plan: &PreconditionPlan, seed: Seed) -> Result<Self> {
        plan.validate()?;
        if !a.is_square() {
            return Err(Error::Shape(format!("preconditioned solve needs a square matrix, got {:?}", a.shape())));
        }
        let n = a.rows();
        let left = MultiplierOperator::build(&plan.left, seed.substream(TAG_LEFT), n)?;
        let right = MultiplierOperator::build(&plan.right, seed.substream(TAG_RIGHT), n)?;
        let fa = if left.is_identity() { None } else { Some(left.left(a)?) };
        let fah = match (fa, right.is_identity()) {
            (None, true) => None,
            (Some(fa), true) => Some(fa),
            (fa, false) => Some(right.right(fa.as_ref().unwrap_or(a))?),
        };
        let opts = GenpOptions { zero_pivot_threshold: plan.zero_pivot_threshold, ..Default::default() };
        let (factorization, safety) = genp_factor_with(fah.as_ref().unwrap_or(a), opts)?;
        Ok(Self { left, right, factorization, safety })
    }

    /// `x = H (F A H)^{-1} F b`
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let fb = self.left.apply_vec(b)?;
        let y = self.factorization.solve(&fb)?;
        self.right.apply_vec(&y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub solution: Vec<f64>,
    /// `||A x - b|| / ||b||` for the original `A` and `b`.
    pub relative_residual: f64,
    /// One entry before refinement, then one per step.
    pub residual_history: Vec<f64>,
    pub safety: SafetyReport,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("preconditioned solve ({}, seed {seed}) failed: {source}", plan.label())]
pub struct SolveError {
    pub plan: PreconditionPlan,
    pub seed: Seed,
    #[source]
    pub source: Error,
}

/// One refinement step `x + H (F A H)^{-1} F (b - A x)`.
pub fn refine_once(a: &RealMatrix, system: &PreconditionedSystem, x: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let r = residual(a, x, b)?;
    let d = system.solve(&r)?;
    Ok(x.iter().zip(d).map(|(xi, di)| xi + di).collect())
}

pub fn preconditioned_solve(
    a: &RealMatrix,
    b: &[f64],
    plan: &PreconditionPlan,
    seed: Seed,
) -> std::result::Result<SolveOutcome, SolveError> {
    let wrap = |source: Error| SolveError { plan: plan.clone(), seed, source };
    if b.len() != a.rows() {
        return Err(wrap(Error::Shape(format!("rhs length {} for order {}", b.len(), a.rows()))));
    }
    let system = PreconditionedSystem::build(a, plan, seed).map_err(wrap)?;
    let mut x = system.solve(b).map_err(wrap)?;
    let mut history = vec![relative_residual(a, &x, b).map_err(wrap)?];
    for _ in 0..plan.refinement_steps {
        x = refine_once(a, &system, &x, b).map_err(wrap)?;
        history.push(relative_residual(a, &x, b).map_err(wrap)?);
    }
    let failure = if x.iter().all(|v| v.is_finite()) {
        None
    } else {
        Some("solution has non-finite entries".to_string())
    };
    let relative_residual = if failure.is_some() { f64::INFINITY } else { *history.last().expect("nonempty") };
    Ok(SolveOutcome { solution: x, relative_residual, residual_history: history, safety: system.safety, failure })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorization::{genp_factor, lu_solve};
    use crate::testgen::hard_matrix;

    fn diag_dominant(n: usize, seed: u64) -> RealMatrix {
        let g = gaussian_matrix(Seed::new(seed), n, n).unwrap();
        g.add(&RealMatrix::identity(n).scale(2.0 * n as f64)).unwrap()
    }

    #[test]
    fn identity_plan_is_plain_genp() {
        let a = diag_dominant(12, 1);
        let b: Vec<f64> = (0..12).map(|i| i as f64 - 3.0).collect();
        let out = preconditioned_solve(&a, &b, &PreconditionPlan::identity(), Seed::new(9)).unwrap();
        let (f, _) = genp_factor(&a, 0.0).unwrap();
        let x = lu_solve(&f, &b).unwrap();
        assert_eq!(out.solution, x);
        assert_eq!(out.relative_residual, relative_residual(&a, &x, &b).unwrap());
        assert_eq!(out.residual_history.len(), 1);
    }

    #[test]
    fn two_sided_gaussian_recovers_solution() {
        for t in 0..5 {
            let a = diag_dominant(16, 10 + t);
            let b = crate::randgen::gaussian_vector(Seed::new(t), 16);
            let plan = PreconditionPlan::two_sided(Multiplier::Gaussian);
            let out = preconditioned_solve(&a, &b, &plan, Seed::new(t)).unwrap();
            assert!(out.relative_residual <= 1e-8);
        }
    }

    #[test]
    fn every_multiplier_kind_solves() {
        let a = diag_dominant(8, 3);
        let b = vec![1.0; 8];
        for kind in ["gaussian", "circulant", "toeplitz", "hankel", "finite-set"] {
            let m: Multiplier = kind.parse().unwrap();
            for plan in [
                PreconditionPlan::new(m.clone(), Multiplier::None),
                PreconditionPlan::new(Multiplier::None, m.clone()),
                PreconditionPlan::two_sided(m.clone()),
            ] {
                let out = preconditioned_solve(&a, &b, &plan, Seed::new(5)).unwrap();
                assert!(out.relative_residual < 1e-9, "{kind}: {}", out.relative_residual);
            }
        }
    }

    #[test]
    fn fast_and_dense_structured_paths_agree() {
        let n = FAST_APPLY_MIN_ORDER;
        let a = diag_dominant(n, 4);
        for kind in [Multiplier::Circulant, Multiplier::Toeplitz, Multiplier::Hankel] {
            let op = MultiplierOperator::build(&kind, Seed::new(6), n).unwrap();
            assert!(!matches!(op, MultiplierOperator::Dense(_)));
            let dense = op.materialize(n).unwrap();
            let fast = op.right(&op.left(&a).unwrap()).unwrap();
            let slow = dense.mat_mul(&a).unwrap().mat_mul(&dense).unwrap();
            assert!(fast.sub(&slow).unwrap().frobenius_norm() <= 1e-12 * slow.frobenius_norm());
        }
    }

    #[test]
    fn refinement_history_and_exact_input() {
        let a = diag_dominant(10, 7);
        let b = vec![0.5; 10];
        let plan = PreconditionPlan::default().with_refinement(3);
        let out = preconditioned_solve(&a, &b, &plan, Seed::new(2)).unwrap();
        assert_eq!(out.residual_history.len(), 4);
        let system = PreconditionedSystem::build(&a, &plan, Seed::new(2)).unwrap();
        let x_exact = vec![1.0; 10];
        let b_exact = a.mat_vec(&x_exact).unwrap();
        let x = refine_once(&a, &system, &x_exact, &b_exact).unwrap();
        let shift: f64 = x.iter().zip(&x_exact).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        assert!(shift <= 1e-12 * 10f64.sqrt());
    }

    #[test]
    fn zero_pivot_error_carries_plan_and_seed() {
        let a = RealMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]);
        let err = preconditioned_solve(&a, &[1.0, 1.0], &PreconditionPlan::identity(), Seed::new(77)).unwrap_err();
        assert_eq!(err.seed, Seed::new(77));
        assert_eq!(err.plan, PreconditionPlan::identity());
        assert!(matches!(err.source, Error::ZeroPivot { step: 1, .. }));
        let err = preconditioned_solve(&a, &[1.0], &PreconditionPlan::identity(), Seed::new(1)).unwrap_err();
        assert!(matches!(err.source, Error::Shape(_)));
    }

    #[test]
    fn hard_instance_needs_the_multipliers() {
        let inst = hard_matrix(Seed::new(8), 64, 4).unwrap();
        let plain = preconditioned_solve(&inst.matrix, &inst.rhs, &PreconditionPlan::identity(), Seed::new(8)).unwrap();
        let out = preconditioned_solve(&inst.matrix, &inst.rhs, &PreconditionPlan::default(), Seed::new(8)).unwrap();
        assert!(out.relative_residual <= 4e-9);
        assert!(plain.relative_residual > 1e3 * out.relative_residual);
    }

    #[test]
    fn parse_multiplier_names() {
        for m in ["none", "gaussian", "circulant", "toeplitz", "hankel", "finite-set"] {
            assert_eq!(m.parse::<Multiplier>().unwrap().name(), m);
        }
        assert!("dense".parse::<Multiplier>().is_err());
        let mut plan = PreconditionPlan::identity();
        plan.zero_pivot_threshold = -1.0;
        assert!(plan.validate().is_err());
    }
}
