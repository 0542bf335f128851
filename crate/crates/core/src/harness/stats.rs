use serde::{Deserialize, Serialize};

/// One table row: `min`, `max`, `mean` and sample standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRow {
    pub dimension: usize,
    /// Refinement steps applied before measuring.
    pub iterations: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Divisor `count - 1`; zero for a single sample.
    pub std: f64,
    pub count: usize,
    pub failures: usize,
}

impl StatsRow {
    /// Samples are sorted first so the result does not depend on their order.
    pub fn from_samples(dimension: usize, iterations: usize, mut samples: Vec<f64>, failures: usize) -> Self {
        samples.sort_by(f64::total_cmp);
        let count = samples.len();
        if count == 0 {
            let nan = f64::NAN;
            return Self { dimension, iterations, min: nan, max: nan, mean: nan, std: nan, count, failures };
        }
        let mean = samples.iter().sum::<f64>() / count as f64;
        let std = if count > 1 {
            (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self {
            dimension,
            iterations,
            min: samples[0],
            max: samples[count - 1],
            mean: mean.clamp(samples[0], samples[count - 1]),
            std,
            count,
            failures,
        }
    }
}

/// Median of a sample; `NaN` when empty.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    match v.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => v[n / 2],
        n => 0.5 * (v[n / 2 - 1] + v[n / 2]),
    }
}
