//! Interval estimates and goodness-of-fit tests for Monte Carlo results.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Number of standard deviations used for every interval.
pub const Z: f64 = 3.0;

/// Trials from which the normal approximation is used instead of Wilson.
pub const NORMAL_MIN_TRIALS: u64 = 10_000;

/// Point estimate with a two-sided interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub low: f64,
    pub high: f64,
}

impl Estimate {
    /// A value known exactly (interval of width zero).
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            low: value,
            high: value,
        }
    }
}

/// `successes / trials` with a 3σ normal interval for large samples and a
/// Wilson score interval (same `z`) otherwise.
pub fn proportion(successes: u64, trials: u64) -> Estimate {
    assert!(trials > 0, "no trials");
    let n = trials as f64;
    let p = successes as f64 / n;
    if trials >= NORMAL_MIN_TRIALS {
        let half = Z * (p * (1.0 - p) / n).sqrt();
        Estimate {
            value: p,
            low: (p - half).max(0.0),
            high: (p + half).min(1.0),
        }
    } else {
        let (low, high) = wilson(p, n, Z);
        // the score interval always contains an all-or-nothing outcome
        let low = if successes == 0 { 0.0 } else { low };
        let high = if successes == trials { 1.0 } else { high };
        Estimate { value: p, low, high }
    }
}

fn wilson(p: f64, n: f64, z: f64) -> (f64, f64) {
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Standard error of `successes / trials`.
pub fn proportion_sigma(successes: u64, trials: u64) -> f64 {
    let n = trials as f64;
    let p = successes as f64 / n;
    (p * (1.0 - p) / n).sqrt()
}

/// Upper-tail p-value of a chi-squared statistic.
pub fn chi_squared_sf(statistic: f64, dof: u64) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    (1.0 - dist.cdf(statistic)).clamp(0.0, 1.0)
}

/// Pearson test of `counts` against the uniform distribution over its cells.
/// Returns the p-value.
pub fn chi_squared_uniform(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    if counts.len() < 2 || total == 0 {
        return 1.0;
    }
    let expected = total as f64 / counts.len() as f64;
    let stat: f64 = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum();
    chi_squared_sf(stat, counts.len() as u64 - 1)
}

/// Pearson homogeneity test of two samples over the same cells. Cells empty
/// in both samples are dropped. Returns the p-value.
pub fn chi_squared_two_sample(a: &[u64], b: &[u64]) -> f64 {
    assert_eq!(a.len(), b.len(), "samples must share cells");
    let na: u64 = a.iter().sum();
    let nb: u64 = b.iter().sum();
    if na == 0 || nb == 0 {
        return 1.0;
    }
    let n = (na + nb) as f64;
    let mut stat = 0.0;
    let mut cells = 0u64;
    for (&x, &y) in a.iter().zip(b) {
        let col = (x + y) as f64;
        if col == 0.0 {
            continue;
        }
        cells += 1;
        for (obs, row) in [(x, na), (y, nb)] {
            let e = row as f64 * col / n;
            let d = obs as f64 - e;
            stat += d * d / e;
        }
    }
    chi_squared_sf(stat, cells.saturating_sub(1))
}
