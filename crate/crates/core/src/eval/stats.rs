use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Standard error of the mean: sample standard deviation over `sqrt(n)`.
/// Zero for a single value.
pub fn sem(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(values);
    let var = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

/// Bonferroni correction, clamped at 1.
pub fn bonferroni(p: f64, num_comparisons: usize) -> f64 {
    (p * num_comparisons as f64).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Degeneracy {
    /// Every difference is zero.
    NoDifference,
    /// Differences are constant (up to rounding) and nonzero.
    ZeroVariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub df: usize,
    /// Two-sided p-value before correction.
    pub p: f64,
    pub p_corrected: f64,
    pub degenerate: Option<Degeneracy>,
}

const ROUNDING_TOLERANCE: f64 = 1e-12;

/// Two-sided paired t-test on `a - b`, Bonferroni-corrected for
/// `num_comparisons` tests.
pub fn paired_ttest(a: &[f64], b: &[f64], num_comparisons: usize) -> Result<TTest> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
    }
    if a.len() < 2 {
        return Err(Error::TooFewSamples { found: a.len(), required: 2 });
    }
    if num_comparisons == 0 {
        return Err(Error::InvalidConfig("number of comparisons must be at least 1".into()));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let df = diffs.len() - 1;
    let m = mean(&diffs);
    let se = sem(&diffs);
    let correct = |p: f64| bonferroni(p, num_comparisons);
    let scale = diffs.iter().fold(0.0f64, |acc, d| acc.max(d.abs()));
    // differences equal up to rounding, e.g. 0.4 - 0.3 against 0.6 - 0.5
    if se <= ROUNDING_TOLERANCE * scale {
        let all_zero = diffs.iter().all(|&d| d == 0.0);
        let (t, p, flag) = if all_zero {
            (0.0, 1.0, Degeneracy::NoDifference)
        } else {
            (m.signum() * f64::INFINITY, 0.0, Degeneracy::ZeroVariance)
        };
        return Ok(TTest { t, df, p, p_corrected: correct(p), degenerate: Some(flag) });
    }
    let t = m / se;
    let dist = StudentsT::new(0.0, 1.0, df as f64).expect("df >= 1");
    let p = (2.0 * dist.cdf(-t.abs())).min(1.0);
    Ok(TTest { t, df, p, p_corrected: correct(p), degenerate: None })
}
