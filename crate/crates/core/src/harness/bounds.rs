use serde::{Deserialize, Serialize};

/// Relative slack used by the deterministic inequality checks.
pub const DEFAULT_SLACK: f64 = 1e-8;
const KEPT_EXAMPLES: usize = 5;

/// Outcome of one family of inequality checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundFamily {
    pub name: String,
    pub checks: usize,
    pub violations: usize,
    /// Largest `(required - observed) / scale`; negative when every check held.
    pub worst_excess: f64,
    /// The first few violations, with parameters.
    pub examples: Vec<String>,
    /// Reported but not part of the overall verdict.
    pub diagnostic: bool,
}

impl BoundFamily {
    pub fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            checks: 0,
            violations: 0,
            worst_excess: f64::NEG_INFINITY,
            examples: Vec::new(),
            diagnostic: false,
        }
    }

    pub fn diagnostic(mut self) -> Self {
        self.diagnostic = true;
        self
    }

    /// Records `observed >= required - slack * scale`.
    pub fn at_least(&mut self, observed: f64, required: f64, scale: f64, slack: f64, context: impl FnOnce() -> String) {
        self.checks += 1;
        let scale = if scale > 0.0 { scale } else { 1.0 };
        let excess = (required - observed) / scale;
        if excess.is_nan() || excess > self.worst_excess {
            self.worst_excess = if excess.is_nan() { f64::INFINITY } else { excess };
        }
        if !(excess <= slack) {
            self.violations += 1;
            if self.examples.len() < KEPT_EXAMPLES {
                self.examples.push(format!("{}: observed {observed:.6e}, required {required:.6e}", context()));
            }
        }
    }

    /// Records `observed <= limit * (1 + slack)`.
    pub fn at_most(&mut self, observed: f64, limit: f64, slack: f64, context: impl FnOnce() -> String) {
        self.at_least(limit, observed, limit.abs(), slack, context);
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// A set of families with an overall verdict over the non-diagnostic ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub title: String,
    pub master_seed: u64,
    pub trials: usize,
    pub families: Vec<BoundFamily>,
    pub passed: bool,
}

impl BoundReport {
    pub fn new(title: &str, master_seed: u64, trials: usize, families: Vec<BoundFamily>) -> Self {
        let passed = families.iter().filter(|f| !f.diagnostic).all(BoundFamily::passed);
        Self { title: title.to_string(), master_seed, trials, families, passed }
    }

    pub fn family(&self, name: &str) -> Option<&BoundFamily> {
        self.families.iter().find(|f| f.name == name)
    }
}
