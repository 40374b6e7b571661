//! Empirical probability that a window below the local eigenvalue spacing holds two
//! or more eigenvalues.

use serde::{Deserialize, Serialize};

use crate::ensembles::{sample_matrix, EnsembleSpec};
use crate::error::{invalid, Result};
use crate::harness::seed::{derive_seed, StreamTag};
use crate::harness::stats::wilson_interval;
use crate::harness::trials::{run_trials, TrialSettings};
use crate::spectral::{count_eigenvalues, eigenvalues, Region};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepulsionPoint {
    pub e: f64,
    pub hits: usize,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepulsionReport {
    pub n: usize,
    pub region: Region,
    pub alpha_exp: f64,
    /// Half-width of each window, `N^{-2/3 - a}` at the edge and `N^{-1 - a}` in the bulk.
    pub half_width: f64,
    pub trials: usize,
    pub points: Vec<RepulsionPoint>,
    /// Fraction of trials in which some grid window held two eigenvalues.
    pub union: RepulsionPoint,
    /// `N^{-a}`.
    pub reference: f64,
    pub level: f64,
}

impl RepulsionReport {
    /// Every per-point interval and the union interval lie below the reference.
    pub fn below_reference(&self) -> bool {
        self.points.iter().all(|p| p.ci_high < self.reference)
    }
}

pub fn window_half_width(n: usize, region: Region, alpha_exp: f64) -> f64 {
    let nf = n as f64;
    match region {
        Region::Edge => nf.powf(-2.0 / 3.0 - alpha_exp),
        Region::Bulk => nf.powf(-1.0 - alpha_exp),
    }
}

fn point(e: f64, hits: usize, trials: usize, level: f64) -> RepulsionPoint {
    let (ci_low, ci_high) = wilson_interval(hits, trials, level);
    RepulsionPoint {
        e,
        hits,
        estimate: hits as f64 / trials as f64,
        ci_low,
        ci_high,
    }
}

/// Repulsion frequencies over given spectra.
pub fn repulsion_from_spectra(
    spectra: &[Vec<f64>],
    region: Region,
    alpha_exp: f64,
    e_grid: &[f64],
    level: f64,
) -> Result<RepulsionReport> {
    if !(alpha_exp > 0.0) {
        return Err(invalid(format!("repulsion exponent must be positive, got {alpha_exp}")));
    }
    if spectra.is_empty() || e_grid.is_empty() {
        return Err(invalid("repulsion needs spectra and a nonempty grid"));
    }
    let n = spectra[0].len();
    let w = window_half_width(n, region, alpha_exp);
    let mut hits = vec![0usize; e_grid.len()];
    let mut union = 0usize;
    for l in spectra {
        let mut any = false;
        for (k, &e) in e_grid.iter().enumerate() {
            if count_eigenvalues(l, e - w, e + w)? >= 2 {
                hits[k] += 1;
                any = true;
            }
        }
        union += any as usize;
    }
    let t = spectra.len();
    Ok(RepulsionReport {
        n,
        region,
        alpha_exp,
        half_width: w,
        trials: t,
        points: e_grid.iter().zip(&hits).map(|(&e, &h)| point(e, h, t, level)).collect(),
        union: point(f64::NAN, union, t, level),
        reference: (n as f64).powf(-alpha_exp),
        level,
    })
}

pub fn repulsion_estimate(
    spec: &EnsembleSpec,
    region: Region,
    alpha_exp: f64,
    e_grid: &[f64],
    settings: &TrialSettings,
    level: f64,
) -> Result<RepulsionReport> {
    if !(alpha_exp > 0.0) {
        return Err(invalid(format!("repulsion exponent must be positive, got {alpha_exp}")));
    }
    let out = run_trials(settings, |_, seed| {
        eigenvalues(&sample_matrix(spec, derive_seed(seed, 0, StreamTag::V))?.h)
    })?;
    repulsion_from_spectra(&out.into_values(), region, alpha_exp, e_grid, level)
}
