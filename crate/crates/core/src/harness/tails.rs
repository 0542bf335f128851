//! Monte Carlo checks of the tail bounds for the norm, the smallest
//! singular value and the condition number of Gaussian matrices.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dense::singular_values;
use crate::error::{Error, Result};
use crate::randgen::{gaussian_matrix, Seed};

pub const MIN_TAIL_SAMPLES: usize = 10_000;
pub const TAIL_SIZE_CAP: usize = 16;
/// Constant in the condition number tail.
pub const CONDITION_TAIL_CONSTANT: f64 = 6.414;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0` by the Lanczos approximation.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x)
    } else {
        let x = x - 1.0;
        let t = x + LANCZOS_G + 0.5;
        let sum = LANCZOS[1..].iter().enumerate().fold(LANCZOS[0], |acc, (i, c)| acc + c / (x + i as f64 + 1.0));
        0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + sum.ln()
    }
}

pub fn gamma(x: f64) -> f64 {
    ln_gamma(x).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    pub theorem: String,
    pub m: usize,
    pub n: usize,
    /// Name of the threshold parameter (`t`, `z` or `x`).
    pub parameter_name: String,
    pub parameter: f64,
    pub bound: f64,
    pub empirical: f64,
    pub samples: usize,
    /// `3 sqrt(bound (1 - bound) / samples)`.
    pub margin: f64,
    pub verdict: bool,
    /// Reported but not part of the overall verdict.
    pub diagnostic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCheckReport {
    pub master_seed: u64,
    pub samples: usize,
    pub points: Vec<TailPoint>,
    /// Largest `|kappa - 1|` seen for single-column matrices.
    pub single_column_kappa_deviation: f64,
    pub passed: bool,
}

/// Binomial 3-sigma margin around `bound`.
pub fn binomial_margin(bound: f64, samples: usize) -> f64 {
    let p = bound.clamp(0.0, 1.0);
    3.0 * (p * (1.0 - p) / samples as f64).sqrt()
}

fn point(theorem: &str, m: usize, n: usize, name: &str, parameter: f64, bound: f64, hits: usize, samples: usize) -> TailPoint {
    let empirical = hits as f64 / samples as f64;
    let margin = binomial_margin(bound, samples);
    TailPoint {
        theorem: theorem.to_string(),
        m,
        n,
        parameter_name: name.to_string(),
        parameter,
        bound,
        empirical,
        samples,
        margin,
        verdict: bound >= 1.0 || empirical <= bound + margin,
        diagnostic: false,
    }
}

/// Singular values of `samples` Gaussian `m x n` matrices.
fn sample_spectra(seed: Seed, m: usize, n: usize, samples: usize) -> Result<Vec<Vec<f64>>> {
    let base = seed.substream(((m as u64) << 32) | n as u64);
    (0..samples).map(|i| singular_values(&gaussian_matrix(base.with_stream(i as u64), m, n)?)).collect()
}

fn count(spectra: &[Vec<f64>], pred: impl Fn(&[f64]) -> bool) -> usize {
    spectra.iter().filter(|s| pred(s)).count()
}

const NORM_GRID: [(usize, usize, f64); 4] = [(8, 4, 1.0), (8, 4, 3.0), (12, 6, 2.0), (16, 16, 1.0)];
const NORM_Z_GRID: [(usize, usize, f64); 2] = [(8, 4, 0.5), (16, 16, 0.25)];
const SMALLEST_GRID: [(usize, usize, f64); 4] = [(8, 8, 0.2), (8, 8, 0.5), (10, 8, 1.0), (16, 12, 1.5)];
const VECTOR_GRID: [(usize, f64); 3] = [(2, 2.0), (4, 1.5), (8, 1.6)];
const CONDITION_GRID: [(usize, usize, f64); 5] = [(8, 8, 50.0), (8, 8, 1600.0), (12, 8, 20.0), (16, 12, 15.0), (16, 16, 400.0)];

pub fn check_tail_bounds(seed: Seed, samples: usize) -> Result<TailCheckReport> {
    if samples < MIN_TAIL_SAMPLES {
        return Err(Error::InvalidArgument(format!("need at least {MIN_TAIL_SAMPLES} samples, got {samples}")));
    }
    let mut cache: Vec<((usize, usize), Vec<Vec<f64>>)> = Vec::new();
    let mut spectra = |m: usize, n: usize| -> Result<Vec<Vec<f64>>> {
        if let Some((_, s)) = cache.iter().find(|(k, _)| *k == (m, n)) {
            return Ok(s.clone());
        }
        let s = sample_spectra(seed, m, n, samples)?;
        cache.push(((m, n), s.clone()));
        Ok(s)
    };
    let mut points = Vec::new();

    for (m, n, t) in NORM_GRID {
        let sp = spectra(m, n)?;
        let z = t + (m as f64).sqrt() + (n as f64).sqrt();
        let hits = count(&sp, |s| s[0] > z);
        points.push(point("norm_tail_shifted", m, n, "t", t, (-t * t / 2.0).exp(), hits, samples));
    }
    for (m, n, excess) in NORM_Z_GRID {
        let sp = spectra(m, n)?;
        let h = m.max(n) as f64;
        let z = 2.0 * h.sqrt() + excess;
        let hits = count(&sp, |s| s[0] > z);
        let bound = (-(z - 2.0 * h.sqrt()).powi(2) / 2.0).exp();
        points.push(point("norm_tail_centered", m, n, "z", z, bound, hits, samples));
    }
    for (m, n, x) in SMALLEST_GRID {
        let sp = spectra(m, n)?;
        // ||G^+|| >= m / x^2  <=>  sigma_min <= x^2 / m
        let hits = count(&sp, |s| 1.0 / s[n - 1] >= m as f64 / (x * x));
        let d = (m - n + 1) as f64;
        let bound = x.powf(d) / gamma(d + 1.0);
        points.push(point("smallest_singular_value_tail", m, n, "x", x, bound, hits, samples));
    }
    for (m, x) in VECTOR_GRID {
        let sp = spectra(m, 1)?;
        let hits = count(&sp, |s| 1.0 / s[0] >= x);
        let mf = m as f64;
        let bound = (mf / 2.0).powf((mf - 2.0) / 2.0) / (gamma(mf / 2.0) * x.powf(mf));
        points.push(point("vector_pinv_tail", m, 1, "x", x, bound, hits, samples));
    }
    for (m, n, x) in CONDITION_GRID {
        let sp = spectra(m, n)?;
        let d = (m - n + 1) as f64;
        let hits = count(&sp, |s| s[0] / s[n - 1] * m as f64 / d > x);
        let bound = (CONDITION_TAIL_CONSTANT / x).powf(d) / (2.0 * PI);
        points.push(point("condition_tail", m, n, "x", x, bound, hits, samples));
        // the scaling n / (m - n + 1) with prefactor 1 / sqrt(2 pi)
        let hits = count(&sp, |s| s[0] / s[n - 1] * d / n as f64 > x);
        let bound = (CONDITION_TAIL_CONSTANT / x).powf(d) / (2.0 * PI).sqrt();
        let mut p = point("condition_tail_scaled_by_n", m, n, "x", x, bound, hits, samples);
        p.diagnostic = true;
        points.push(p);
    }

    let mut deviation = 0.0f64;
    for m in [1usize, 4, 16] {
        for s in spectra(m, 1)? {
            // kappa of a single column is sigma_1 / sigma_1
            deviation = deviation.max((s[0] / s[s.len() - 1] - 1.0).abs());
        }
    }
    let passed = deviation <= 1e-12 && points.iter().filter(|p| !p.diagnostic).all(|p| p.verdict);
    Ok(TailCheckReport { master_seed: seed.master, samples, points, single_column_kappa_deviation: deviation, passed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_known_values() {
        assert!((gamma(5.0) - 24.0).abs() < 1e-10);
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-12);
        assert!((gamma(1.0) - 1.0).abs() < 1e-13);
        assert!((ln_gamma(100.0) - 359.134_205_369_575_4).abs() < 1e-9);
        assert!((gamma(0.25) - 3.625_609_908_221_908).abs() < 1e-12);
    }

    #[test]
    fn verdict_rule() {
        let p = point("x", 1, 1, "t", 1.0, 0.1, 1080, 10_000);
        assert!((p.margin - 0.009).abs() < 1e-12);
        assert!(p.verdict);
        assert!(!point("x", 1, 1, "t", 1.0, 0.1, 1200, 10_000).verdict);
        assert!(point("x", 1, 1, "t", 1.0, 2.0, 10_000, 10_000).verdict);
    }

    #[test]
    fn too_few_samples() {
        assert!(check_tail_bounds(Seed::new(1), 100).is_err());
    }
}
