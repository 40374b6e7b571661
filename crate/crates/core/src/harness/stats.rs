//! Statistics kernels: two-sample KS distance, bootstrap intervals, binomial
//! intervals and small descriptive helpers.

use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};
use serde::{Deserialize, Serialize};

use super::seed::{stream_rng, StreamTag};
use crate::error::{invalid, Result};

/// Two-sample Kolmogorov-Smirnov distance `sup_x |F_A(x) - F_B(x)|`.
///
/// Sorts both samples and walks them together, advancing past all copies of the
/// current smallest value before comparing, so ties are handled exactly.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(invalid("KS distance needs two nonempty samples"));
    }
    if a.iter().chain(b).any(|x| x.is_nan()) {
        return Err(invalid("KS distance is undefined for NaN samples"));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Median (mean of the middle pair for even lengths); NaN when empty.
pub fn median(xs: &[f64]) -> f64 {
    quantile(xs, 0.5)
}

/// Linear-interpolation quantile of the sample.
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, q)
}

fn quantile_sorted(v: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub estimate: f64,
    pub low: f64,
    pub high: f64,
    pub level: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.low <= x && x <= self.high
    }

    pub fn width(&self) -> f64 {
        self.high - self.low
    }
}

/// Percentile bootstrap interval for `statistic` over `samples`.
///
/// Deterministic given `seed`. The interval is widened, if needed, to contain the
/// full-sample estimate.
pub fn bootstrap_ci<F>(samples: &[f64], statistic: F, resamples: usize, level: f64, seed: u64) -> Result<Interval>
where
    F: Fn(&[f64]) -> f64,
{
    check_bootstrap_args(samples.len(), resamples, level)?;
    let estimate = statistic(samples);
    let mut rng = stream_rng(seed, 0, StreamTag::BOOTSTRAP);
    let n = samples.len();
    let mut buf = vec![0.0; n];
    let mut stats = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        for slot in buf.iter_mut() {
            *slot = samples[rng.random_range(0..n)];
        }
        stats.push(statistic(&buf));
    }
    Ok(percentile_interval(estimate, stats, level))
}

/// Bootstrap interval for `mean(a) - mean(b)` where `a[k]` and `b[k]` come from the
/// same trial and are resampled together.
pub fn paired_bootstrap_mean_diff(a: &[f64], b: &[f64], resamples: usize, level: f64, seed: u64) -> Result<Interval> {
    if a.len() != b.len() {
        return Err(invalid("paired bootstrap needs equally long samples"));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    bootstrap_ci(&diffs, mean, resamples, level, seed)
}

/// Bootstrap interval for `mean(a) - mean(b)` with independent samples, each
/// resampled separately.
pub fn bootstrap_mean_diff(a: &[f64], b: &[f64], resamples: usize, level: f64, seed: u64) -> Result<Interval> {
    check_bootstrap_args(a.len().min(b.len()), resamples, level)?;
    let estimate = mean(a) - mean(b);
    let mut rng = stream_rng(seed, 1, StreamTag::BOOTSTRAP);
    let mut stats = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let ma = (0..a.len()).map(|_| a[rng.random_range(0..a.len())]).sum::<f64>() / a.len() as f64;
        let mb = (0..b.len()).map(|_| b[rng.random_range(0..b.len())]).sum::<f64>() / b.len() as f64;
        stats.push(ma - mb);
    }
    Ok(percentile_interval(estimate, stats, level))
}

fn check_bootstrap_args(n: usize, resamples: usize, level: f64) -> Result<()> {
    if n == 0 {
        return Err(invalid("bootstrap needs a nonempty sample"));
    }
    if resamples < 200 {
        return Err(invalid(format!("bootstrap needs at least 200 resamples, got {resamples}")));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(invalid(format!("confidence level must lie in (0, 1), got {level}")));
    }
    Ok(())
}

fn percentile_interval(estimate: f64, mut stats: Vec<f64>, level: f64) -> Interval {
    stats.sort_by(f64::total_cmp);
    let alpha = (1.0 - level) / 2.0;
    let low = quantile_sorted(&stats, alpha).min(estimate);
    let high = quantile_sorted(&stats, 1.0 - alpha).max(estimate);
    Interval {
        estimate,
        low,
        high,
        level,
    }
}

/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: usize, trials: usize, level: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = normal_quantile(0.5 + level / 2.0);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Empirical CDF of a sorted sample evaluated at `x` (fraction of values `<= x`).
pub fn ecdf_sorted(sorted: &[f64], x: f64) -> f64 {
    sorted.partition_point(|v| *v <= x) as f64 / sorted.len() as f64
}

/// Ordinary least squares slope and intercept of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let mx = mean(x);
    let my = mean(y);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
