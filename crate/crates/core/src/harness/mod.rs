//! Residual experiments on hard instances and the verification suites for
//! the singular-value bounds, tail bounds, safety bounds, Schur complement
//! algebra and finite-set singularity probabilities.

mod bounds;
mod exact;
mod experiment;
mod report;
mod spectral;
mod stats;
mod tails;
mod verify;

pub use bounds::{BoundFamily, BoundReport, DEFAULT_SLACK};
pub use exact::{
    check_finite_set_singularity, exact_determinant_int, is_strongly_nonsingular_int, FiniteSetReport,
    FrequencyCheck, EXACT_SIZE_CAP, FINITE_SET_CARDINALITY_CAP,
};
pub use experiment::{
    run_residual_experiment, trial_seed, ExperimentConfig, Method, TableReport, TrialRecord, DEFAULT_DIMS,
    DEFAULT_TRIALS,
};
pub use report::{emit_report, ReportFormat, Tabular, TABLE_CSV_HEADER};
pub use spectral::{check_perturbation_bound, check_spectral_bounds};
pub use stats::{median, StatsRow};
pub use tails::{
    binomial_margin, check_tail_bounds, gamma, ln_gamma, TailCheckReport, TailPoint, CONDITION_TAIL_CONSTANT,
    MIN_TAIL_SAMPLES, TAIL_SIZE_CAP,
};
pub use verify::{
    gepp_determinant, spd_instance, strongly_nonsingular_gaussian, verify_safety, verify_schur_algebra,
    SafetyRunSummary, DETERMINANT_TOLERANCE, SCHUR_TOLERANCE,
};
