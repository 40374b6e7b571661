//! Empirical tail checks for entry laws.

use serde::{Deserialize, Serialize};

use super::EntryLaw;
use crate::error::{invalid, Result};
use crate::harness::seed::{stream_rng, StreamTag};
use crate::harness::stats::wilson_interval;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailPoint {
    pub x: f64,
    /// Empirical `P(|X| >= x)`.
    pub exceedance: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailReport {
    pub n_samples: usize,
    pub points: Vec<TailPoint>,
    /// Largest `theta` on the scan grid with `exceedance(x) <= exp(-x^theta) / theta`
    /// at every grid point.
    pub fitted_theta: Option<f64>,
    pub bounded_support: bool,
    pub passes: bool,
}

pub const DEFAULT_TAIL_GRID: [f64; 12] = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0];

pub fn tail_check(law: &EntryLaw, n_samples: usize, seed: u64) -> Result<TailReport> {
    tail_check_on(law, n_samples, seed, &DEFAULT_TAIL_GRID)
}

pub fn tail_check_on(law: &EntryLaw, n_samples: usize, seed: u64, grid: &[f64]) -> Result<TailReport> {
    if n_samples < 10_000 {
        return Err(invalid(format!("tail check needs at least 10^4 samples, got {n_samples}")));
    }
    let mut rng = stream_rng(seed, 0, StreamTag::TAIL);
    let mut counts = vec![0usize; grid.len()];
    for _ in 0..n_samples {
        let a = law.sample(&mut rng).abs();
        for (c, &x) in counts.iter_mut().zip(grid) {
            if a >= x {
                *c += 1;
            }
        }
    }
    let points: Vec<TailPoint> = grid
        .iter()
        .zip(&counts)
        .map(|(&x, &c)| {
            let (lo, hi) = wilson_interval(c, n_samples, 0.95);
            TailPoint {
                x,
                exceedance: c as f64 / n_samples as f64,
                ci_low: lo,
                ci_high: hi,
            }
        })
        .collect();
    let fitted_theta = (1..=300)
        .rev()
        .map(|k| k as f64 * 0.01)
        .find(|&t| points.iter().all(|p| p.exceedance <= (-p.x.powf(t)).exp() / t));
    let bounded_support = law.support_bound().is_some();
    Ok(TailReport {
        n_samples,
        passes: bounded_support || fitted_theta.is_some(),
        points,
        fitted_theta,
        bounded_support,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{adaptive_simpson, SimpsonOptions};

    #[test]
    fn bounded_laws_have_empty_tails() {
        let r = tail_check(&EntryLaw::rademacher(), 10_000, 1).unwrap();
        let p = r.points.iter().find(|p| p.x == 1.5).unwrap();
        assert_eq!(p.exceedance, 0.0);
        assert!(r.passes && r.bounded_support);
        let tp = EntryLaw::three_point(3f64.sqrt(), 1.0 / 6.0).unwrap();
        let r = tail_check(&tp, 20_000, 2).unwrap();
        assert_eq!(r.points.iter().find(|p| p.x == 2.0).unwrap().exceedance, 0.0);
        // P(|X| >= 1) = 1/3 for this law
        let p1 = r.points.iter().find(|p| p.x == 1.0).unwrap();
        assert!(p1.ci_low <= 1.0 / 3.0 && 1.0 / 3.0 <= p1.ci_high);
    }

    #[test]
    fn gaussian_tail_at_three() {
        // 2 * (1 - Phi(3)) by quadrature of the normal density
        let dens = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let q = adaptive_simpson(dens, 3.0, 40.0, SimpsonOptions::with_tol(1e-15)).value * 2.0;
        assert!((q - 0.0026997960632601866).abs() < 1e-12);
        let r = tail_check(&EntryLaw::gaussian(), 1_000_000, 9).unwrap();
        let p = r.points.iter().find(|p| p.x == 3.0).unwrap();
        let se = (q * (1.0 - q) / 1e6).sqrt();
        assert!((p.exceedance - q).abs() <= 3.0 * se, "{} vs {q}", p.exceedance);
        assert!(r.passes);
        assert!(r.fitted_theta.unwrap() >= 0.9);
    }

    #[test]
    fn too_few_samples() {
        assert!(tail_check(&EntryLaw::gaussian(), 100, 1).is_err());
    }
}
