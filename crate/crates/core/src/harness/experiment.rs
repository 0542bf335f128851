//! Residual experiments on hard instances: GEPP, plain GENP and GENP with
//! random multipliers, one table row per dimension and refinement count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::StatsRow;
use crate::dense::{relative_residual, residual};
use crate::error::{Error, Result};
use crate::factorization::{gepp_factor, Factorization};
use crate::pipeline::{preconditioned_solve, PreconditionPlan};
use crate::randgen::Seed;
use crate::testgen::{hard_matrix, DEFAULT_NULLITY};

pub const DEFAULT_DIMS: [usize; 2] = [64, 256];
pub const DEFAULT_TRIALS: usize = 100;
/// Sub-seed tag of the multipliers within a trial.
const MULTIPLIER_TAG: u64 = 0x4D55_4C54;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Gepp,
    Genp,
    /// GENP on `F A H` built from the plan's multipliers.
    Preconditioned,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gepp" => Ok(Method::Gepp),
            "genp" => Ok(Method::Genp),
            "preconditioned" | "genp+plan" => Ok(Method::Preconditioned),
            other => Err(Error::Parse(format!("unknown method {other:?}"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Gepp => "gepp",
            Method::Genp => "genp",
            Method::Preconditioned => "preconditioned",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dims: Vec<usize>,
    pub trials: usize,
    pub method: Method,
    /// Multipliers are used only by [`Method::Preconditioned`];
    /// `refinement_steps` applies to every method.
    pub plan: PreconditionPlan,
    pub master_seed: u64,
    /// Nullity of the leading half block.
    pub nullity: usize,
    /// Worker threads; 0 lets the pool decide.
    pub workers: usize,
}

impl ExperimentConfig {
    pub fn new(method: Method, plan: PreconditionPlan, master_seed: u64) -> Self {
        Self {
            dims: DEFAULT_DIMS.to_vec(),
            trials: DEFAULT_TRIALS,
            method,
            plan,
            master_seed,
            nullity: DEFAULT_NULLITY,
            workers: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if self.dims.is_empty() {
            return Err(Error::InvalidArgument("no dimensions given".into()));
        }
        if let Some(&n) = self.dims.iter().find(|&&n| n < 8 || !n.is_power_of_two()) {
            return Err(Error::InvalidArgument(format!("dimension {n} is not a power of two >= 8")));
        }
        self.plan.validate()
    }

    pub fn label(&self) -> String {
        match self.method {
            Method::Preconditioned => format!("{} {}", self.method, self.plan.label()),
            m => m.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub dimension: usize,
    pub trial: usize,
    /// Seed of the instance; shared by every method.
    pub seed: Seed,
    /// Relative residual before refinement, then after each step.
    pub residuals: Vec<f64>,
    pub failure: Option<String>,
}

impl TrialRecord {
    /// Residual after `steps` refinement steps, infinite on failure.
    pub fn residual_at(&self, steps: usize) -> f64 {
        if self.failure.is_some() {
            f64::INFINITY
        } else {
            self.residuals.get(steps).copied().unwrap_or(f64::INFINITY)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableReport {
    pub title: String,
    pub master_seed: u64,
    pub config: ExperimentConfig,
    pub rows: Vec<StatsRow>,
    pub trials: Vec<TrialRecord>,
}

impl TableReport {
    pub fn records(&self, dimension: usize) -> impl Iterator<Item = &TrialRecord> {
        self.trials.iter().filter(move |r| r.dimension == dimension)
    }

    pub fn row(&self, dimension: usize, iterations: usize) -> Option<&StatsRow> {
        self.rows.iter().find(|r| r.dimension == dimension && r.iterations == iterations)
    }
}

/// Seed of trial `t`; the instance at every dimension derives from it.
pub fn trial_seed(master: u64, t: usize) -> Seed {
    Seed::new(master).with_stream(t as u64)
}

fn gepp_residuals(a: &crate::RealMatrix, b: &[f64], steps: usize) -> Result<Vec<f64>> {
    let f = gepp_factor(a)?;
    let mut x = f.solve(b)?;
    let mut out = vec![relative_residual(a, &x, b)?];
    for _ in 0..steps {
        let d = f.solve(&residual(a, &x, b)?)?;
        x.iter_mut().zip(d).for_each(|(xi, di)| *xi += di);
        out.push(relative_residual(a, &x, b)?);
    }
    Ok(out)
}

fn run_trial(config: &ExperimentConfig, n: usize, t: usize) -> TrialRecord {
    let seed = trial_seed(config.master_seed, t);
    let steps = config.plan.refinement_steps;
    let outcome = hard_matrix(seed, n, config.nullity).map_err(|e| e.to_string()).and_then(|inst| {
        let (a, b) = (&inst.matrix, &inst.rhs);
        match config.method {
            Method::Gepp => gepp_residuals(a, b, steps).map_err(|e| e.to_string()),
            Method::Genp | Method::Preconditioned => {
                let plan = if config.method == Method::Genp {
                    PreconditionPlan { zero_pivot_threshold: config.plan.zero_pivot_threshold, ..PreconditionPlan::identity() }
                        .with_refinement(steps)
                } else {
                    config.plan.clone()
                };
                match preconditioned_solve(a, b, &plan, seed.substream(MULTIPLIER_TAG)) {
                    Ok(out) => match out.failure {
                        Some(f) => Err(f),
                        None => Ok(out.residual_history),
                    },
                    Err(e) => Err(e.to_string()),
                }
            }
        }
    });
    let (residuals, failure) = match outcome {
        Ok(r) if r.iter().all(|v| v.is_finite()) => (r, None),
        Ok(r) => (r, Some("non-finite residual".to_string())),
        Err(e) => (Vec::new(), Some(e)),
    };
    TrialRecord { dimension: n, trial: t, seed, residuals, failure }
}

/// Runs every trial at every dimension; failed trials are counted in the
/// rows and left out of the statistics.
pub fn run_residual_experiment(config: &ExperimentConfig) -> Result<TableReport> {
    config.validate()?;
    let jobs: Vec<(usize, usize)> =
        config.dims.iter().flat_map(|&n| (0..config.trials).map(move |t| (n, t))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let trials: Vec<TrialRecord> = pool.install(|| jobs.par_iter().map(|&(n, t)| run_trial(config, n, t)).collect());

    let mut rows = Vec::new();
    for &n in &config.dims {
        for it in 0..=config.plan.refinement_steps {
            let recs: Vec<&TrialRecord> = trials.iter().filter(|r| r.dimension == n).collect();
            let failures = recs.iter().filter(|r| r.failure.is_some()).count();
            let samples = recs.iter().filter(|r| r.failure.is_none()).map(|r| r.residuals[it]).collect();
            rows.push(StatsRow::from_samples(n, it, samples, failures));
        }
    }
    Ok(TableReport {
        title: format!("relative residuals, {}", config.label()),
        master_seed: config.master_seed,
        config: config.clone(),
        rows,
        trials,
    })
}
