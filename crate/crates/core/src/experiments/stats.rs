//! Small statistical helpers for ensemble reports.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::stats_tests::ks_test::{ks_twosample, KSTwoSampleAlternativeMethod};
use statrs::stats_tests::NaNPolicy;

use crate::error::{Error, Result};

/// A proportion with its Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub successes: usize,
    pub n: usize,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub confidence: f64,
}

impl Proportion {
    pub fn new(successes: usize, n: usize, confidence: f64) -> Self {
        let (ci_low, ci_high) = wilson_interval(successes, n, confidence);
        Proportion {
            successes,
            n,
            estimate: if n == 0 { f64::NAN } else { successes as f64 / n as f64 },
            ci_low,
            ci_high,
            confidence,
        }
    }
}

pub fn wilson_interval(successes: usize, n: usize, confidence: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = Normal::standard().inverse_cdf(0.5 + 0.5 * confidence);
    let n = n as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes as f64 == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n_a: usize,
    pub n_b: usize,
}

/// Two-sided two-sample Kolmogorov-Smirnov test; the p-value is exact when
/// `a.len() * b.len() <= 10^4` and asymptotic otherwise.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::TooFewSamples(format!("samples of size {} and {}", a.len(), b.len())));
    }
    let method = if a.len() * b.len() <= 10_000 {
        KSTwoSampleAlternativeMethod::TwoSidedExact
    } else {
        KSTwoSampleAlternativeMethod::TwoSidedAsymptotic
    };
    let (statistic, p_value) = ks_twosample(a.to_vec(), b.to_vec(), method, NaNPolicy::Error)
    .map_err(|e| Error::TooFewSamples(format!("{e:?}")))?;
    Ok(KsResult {
        statistic,
        p_value,
        n_a: a.len(),
        n_b: b.len(),
    })
}

pub fn mean_and_variance(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_matches_hand_computation() {
        // 5 of 10 at 95%: centre 0.5, half width z sqrt(0.025 + z^2/400) / (1 + z^2/10).
        let z: f64 = 1.959963984540054;
        let half = z * (0.025 + z * z / 400.0).sqrt() / (1.0 + z * z / 10.0);
        let (lo, hi) = wilson_interval(5, 10, 0.95);
        assert!((lo - (0.5 - half)).abs() < 1e-12 && (hi - (0.5 + half)).abs() < 1e-12);
        let (lo, hi) = wilson_interval(0, 20, 0.95);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.1 && hi < 0.2);
    }

    #[test]
    fn ks_separates_shifted_samples() {
        let a: Vec<f64> = (0..90).map(|i| i as f64 / 90.0).collect();
        let b: Vec<f64> = a.iter().map(|x| x + 0.003).collect();
        let c: Vec<f64> = a.iter().map(|x| x + 0.5 + 1e-6).collect();
        assert!(ks_two_sample(&a, &b).unwrap().p_value > 0.5);
        let r = ks_two_sample(&a, &c).unwrap();
        assert!((r.statistic - 46.0 / 90.0).abs() < 1e-12 && r.p_value < 1e-6);
        assert!(ks_two_sample(&[1.0], &a).is_err());
        let big: Vec<f64> = (0..500).map(|i| i as f64 / 500.0).collect();
        let shifted: Vec<f64> = big.iter().map(|x| x + 0.2 + 1e-6).collect();
        let r = ks_two_sample(&big, &shifted).unwrap();
        assert!((r.statistic - 101.0 / 500.0).abs() < 1e-12 && r.p_value < 1e-6);
    }
}
