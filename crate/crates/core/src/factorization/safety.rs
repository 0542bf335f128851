//! Pivot monitoring and the local-safety bound check.
//!
//! For an `n x n` matrix with `N = ||A||` and `N_- = max_j ||(A^(j))^{-1}||`
//! over the leading blocks, every pivot (or pivot block) of GENP and block
//! elimination has norm at most `N_+ = N + N_- N^2` and inverse norm at most
//! `N_-`. [`safety_check`] evaluates those bounds against a recorded run.

use serde::{Deserialize, Serialize};

use crate::dense::{singular_values, spectral_norm, RealMatrix};

/// Blocks larger than this are monitored with Frobenius norms.
pub const SPECTRAL_MONITOR_LIMIT: usize = 256;
/// Above this size `N_-` is sampled at power-of-two leading blocks.
pub const FULL_INVERSE_SCAN_LIMIT: usize = 256;
/// Relative slack applied to every bound comparison.
pub const BOUND_SLACK: f64 = 1e-6;
/// `sigma_min <= this * sigma_max` marks a block numerically singular.
pub const SINGULAR_BLOCK_RATIO: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    Spectral,
    /// Upper bound on the spectral norm; never used for bound verdicts.
    Frobenius,
}

/// How much a factorization records about its intermediate matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MonitorLevel {
    /// Pivot magnitudes plus Frobenius norms of the Schur complements,
    /// gathered during the update sweep at no extra pass.
    #[default]
    Pivots,
    /// Spectral norms of every Schur complement and of its inverse
    /// (Frobenius above [`SPECTRAL_MONITOR_LIMIT`]).
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// 1-based elimination step.
    pub step: usize,
    /// Index of the first row/column of the pivot block.
    pub offset: usize,
    pub size: usize,
    /// `|pivot|` for scalar steps, `||B||` for block steps.
    pub pivot_norm: f64,
    /// `1/|pivot|` or `||B^{-1}||`.
    pub pivot_inverse_norm: f64,
    /// Norm of the Schur complement left after this step, if any remains.
    pub schur_norm: Option<f64>,
    pub schur_inverse_norm: Option<f64>,
    pub norm_kind: NormKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SafetyReport {
    pub n: usize,
    /// `N = ||A||` in `input_norm_kind`.
    pub input_norm: f64,
    pub input_norm_kind: NormKind,
    /// `N_-`; filled in by [`safety_check`].
    pub max_inverse_norm: Option<f64>,
    /// `N_+ = N + N_- N^2`; filled in by [`safety_check`].
    pub n_plus: Option<f64>,
    pub steps: Vec<StepRecord>,
    /// `max_k ||S(A^(k), A)|| / ||A||` over recorded steps.
    pub growth_factor: f64,
}

impl SafetyReport {
    pub(crate) fn new(n: usize, input_norm: f64, input_norm_kind: NormKind) -> Self {
        Self {
            n,
            input_norm,
            input_norm_kind,
            max_inverse_norm: None,
            n_plus: None,
            steps: Vec::new(),
            growth_factor: 0.0,
        }
    }

    pub(crate) fn push(&mut self, record: StepRecord) {
        if let Some(s) = record.schur_norm {
            if self.input_norm > 0.0 {
                self.growth_factor = self.growth_factor.max(s / self.input_norm);
            }
        }
        self.steps.push(record);
    }

    pub fn min_pivot(&self) -> f64 {
        self.steps.iter().map(|s| s.pivot_norm).fold(f64::INFINITY, f64::min)
    }

    pub fn max_pivot_inverse(&self) -> f64 {
        self.steps.iter().map(|s| s.pivot_inverse_norm).fold(0.0, f64::max)
    }
}

/// Norm of a matrix and of its inverse, spectral when small enough.
pub(crate) fn norm_pair(a: &RealMatrix) -> (f64, f64, NormKind) {
    let n = a.rows().min(a.cols());
    if n <= SPECTRAL_MONITOR_LIMIT {
        if let Ok(s) = singular_values(a) {
            let last = *s.last().expect("nonempty");
            let inv = if last == 0.0 { f64::INFINITY } else { 1.0 / last };
            return (s[0], inv, NormKind::Spectral);
        }
    }
    let inv = super::dense_inverse(a).map(|m| m.frobenius_norm()).unwrap_or(f64::INFINITY);
    (a.frobenius_norm(), inv, NormKind::Frobenius)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SafetyViolation {
    pub step: usize,
    pub quantity: String,
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SafetyVerdict {
    pub n: usize,
    /// `N = ||A||` (spectral).
    pub input_norm: f64,
    pub max_inverse_norm: f64,
    pub n_plus: f64,
    /// Whether `N_-` was sampled at power-of-two sizes only.
    pub sampled: bool,
    /// Largest ratio of a recorded pivot norm to `N_+`.
    pub pivot_margin: f64,
    /// Largest ratio of a recorded inverse norm to `N_-`.
    pub inverse_margin: f64,
    pub growth_factor: f64,
    /// `(N_+ N_-)^{log2 n}`.
    pub growth_bound: f64,
    /// `2^{n-1}`, the worst-case GEPP growth.
    pub gepp_growth_bound: f64,
    pub violations: Vec<SafetyViolation>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum SafetyOutcome {
    Checked(SafetyVerdict),
    /// The precondition failed: a leading block is numerically singular.
    NotStronglyNonsingular { block_size: usize, ratio: f64 },
}

impl SafetyOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, SafetyOutcome::Checked(v) if v.passed)
    }
}

/// `N_-` over all leading blocks (or sampled ones above the scan limit),
/// or the first numerically singular leading block.
pub fn max_leading_inverse_norm(a: &RealMatrix) -> Result<(f64, bool), (usize, f64)> {
    let n = a.rows();
    let sampled = n > FULL_INVERSE_SCAN_LIMIT;
    let sizes: Vec<usize> = if sampled {
        let mut v: Vec<usize> = (0..).map(|p| 1usize << p).take_while(|&s| s < n).collect();
        v.push(n);
        v
    } else {
        (1..=n).collect()
    };
    let mut worst = 0.0f64;
    for j in sizes {
        let block = a.leading_block(j, j).expect("j <= n");
        let s = singular_values(&block).map_err(|_| (j, f64::NAN))?;
        let (top, bottom) = (s[0], *s.last().expect("nonempty"));
        if !(bottom > SINGULAR_BLOCK_RATIO * top) {
            return Err((j, if top > 0.0 { bottom / top } else { 0.0 }));
        }
        worst = worst.max(1.0 / bottom);
    }
    Ok((worst, sampled))
}

/// Checks a recorded elimination run against `N_+` and `N_-`.
pub fn safety_check(a: &RealMatrix, report: &SafetyReport) -> SafetyOutcome {
    let n = a.rows();
    let (n_minus, sampled) = match max_leading_inverse_norm(a) {
        Ok(v) => v,
        Err((block_size, ratio)) => return SafetyOutcome::NotStronglyNonsingular { block_size, ratio },
    };
    let big_n = spectral_norm(a);
    let n_plus = big_n + n_minus * big_n * big_n;
    let pivot_cap = n_plus * (1.0 + BOUND_SLACK);
    let inverse_cap = n_minus * (1.0 + BOUND_SLACK);

    let mut violations = Vec::new();
    let mut pivot_margin = 0.0f64;
    let mut inverse_margin = 0.0f64;
    let mut check = |step: usize, quantity: &str, value: f64, bound: f64, cap: f64, margin: &mut f64| {
        *margin = margin.max(value / bound);
        if !(value <= cap) {
            violations.push(SafetyViolation { step, quantity: quantity.to_string(), value, bound });
        }
    };
    for rec in &report.steps {
        // scalar pivots are exact magnitudes; block norms are spectral up to the monitor limit
        let exact_block = rec.size == 1 || rec.size <= SPECTRAL_MONITOR_LIMIT;
        if exact_block {
            check(rec.step, "pivot_norm", rec.pivot_norm, n_plus, pivot_cap, &mut pivot_margin);
            check(rec.step, "pivot_inverse_norm", rec.pivot_inverse_norm, n_minus, inverse_cap, &mut inverse_margin);
        }
        if rec.norm_kind == NormKind::Spectral {
            if let Some(s) = rec.schur_norm {
                check(rec.step, "schur_norm", s, n_plus, pivot_cap, &mut pivot_margin);
            }
            if let Some(s) = rec.schur_inverse_norm {
                check(rec.step, "schur_inverse_norm", s, n_minus, inverse_cap, &mut inverse_margin);
            }
        }
    }
    let log_n = (n as f64).log2();
    let growth_bound = (n_plus * n_minus).powf(log_n);
    let gepp_growth_bound = 2f64.powi(n as i32 - 1);
    let growth_ok = report.growth_factor <= growth_bound * (1.0 + BOUND_SLACK);
    if !growth_ok {
        violations.push(SafetyViolation {
            step: 0,
            quantity: "growth_factor".into(),
            value: report.growth_factor,
            bound: growth_bound,
        });
    }
    let passed = violations.is_empty();
    SafetyOutcome::Checked(SafetyVerdict {
        n,
        input_norm: big_n,
        max_inverse_norm: n_minus,
        n_plus,
        sampled,
        pivot_margin,
        inverse_margin,
        growth_factor: report.growth_factor,
        growth_bound,
        gepp_growth_bound,
        violations,
        passed,
    })
}
