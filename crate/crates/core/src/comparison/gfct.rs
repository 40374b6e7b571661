//! Expectations of smooth functions of the edge counting statistic
//! `X = N int_{E1}^{E2} Im m(y + i eta) dy`, `eta = N^{-2/3 - eps}`, under two ensembles.
//!
//! Both ensembles are driven by the same per-trial entry stream, so identical
//! ensembles produce identical matrices and the paired difference is exactly zero.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::ensembles::{sample_matrix, EnsembleSpec};
use crate::error::{invalid, Result};
use crate::harness::seed::{derive_seed, StreamTag};
use crate::harness::stats::{bootstrap_ci, mean, paired_bootstrap_mean_diff, Interval};
use crate::harness::trials::{run_trials, TrialSettings};
use crate::resolvent::smoothed_count;
use crate::spectral::eigenvalues;

/// Smooth test functions with bounded derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SmoothFunction {
    Identity,
    /// `tanh(x / scale)`.
    Tanh { scale: f64 },
    /// `exp(-x^2 / (2 scale^2))`.
    Gaussian { scale: f64 },
}

impl SmoothFunction {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            SmoothFunction::Identity => x,
            SmoothFunction::Tanh { scale } => (x / scale).tanh(),
            SmoothFunction::Gaussian { scale } => (-x * x / (2.0 * scale * scale)).exp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GfctSettings {
    pub e1: f64,
    pub e2: f64,
    pub eps: f64,
    pub trials: usize,
    pub root_seed: u64,
    pub parallelism: usize,
    pub resamples: usize,
    pub level: f64,
}

impl GfctSettings {
    pub fn new(e1: f64, e2: f64, eps: f64, trials: usize, root_seed: u64) -> Self {
        Self {
            e1,
            e2,
            eps,
            trials,
            root_seed,
            parallelism: 0,
            resamples: 1000,
            level: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GfctReport {
    pub n: usize,
    pub e1: f64,
    pub e2: f64,
    pub eta: f64,
    pub trials_used: usize,
    pub failed: usize,
    pub expectation_v: Interval,
    pub expectation_w: Interval,
    /// `E^v F(X) - E^w F(X)` from paired trials.
    pub difference: Interval,
    /// `N^{-1/6}`, the size of the difference predicted by the comparison bound.
    pub reference_scale: f64,
    /// `(trial index, F under v, F under w)`.
    #[serde(skip)]
    pub samples: Vec<(usize, f64, f64)>,
}

impl GfctReport {
    /// The difference is statistically zero or within `factor * N^{-1/6}`.
    pub fn consistent_with_reference(&self, factor: f64) -> bool {
        self.difference.contains(0.0) || self.difference.estimate.abs() <= factor * self.reference_scale
    }
}

/// `X = pi tr(1_[E1, E2] * theta_eta)(H)`, evaluated in closed form.
pub fn counting_statistic(lambda: &[f64], e1: f64, e2: f64, eta: f64) -> Result<f64> {
    Ok(PI * smoothed_count(lambda, e1, e2, eta)?)
}

pub fn gfct_statistic(
    spec_v: &EnsembleSpec,
    spec_w: &EnsembleSpec,
    f: &SmoothFunction,
    settings: &GfctSettings,
) -> Result<GfctReport> {
    let n = spec_v.n();
    if spec_w.n() != n {
        return Err(invalid("ensembles must share N"));
    }
    let nf = n as f64;
    let window = nf.powf(-2.0 / 3.0 + settings.eps);
    for e in [settings.e1, settings.e2] {
        if (e + 2.0).abs() > window {
            return Err(invalid(format!("energy {e} is farther than N^(-2/3+eps) = {window} from -2")));
        }
    }
    if !(settings.e1 <= settings.e2) || !(settings.eps > 0.0) {
        return Err(invalid("need E1 <= E2 and eps > 0"));
    }
    let eta = nf.powf(-2.0 / 3.0 - settings.eps);
    let ts = TrialSettings::new(settings.trials, settings.root_seed).with_parallelism(settings.parallelism);
    let out = run_trials(&ts, |_, seed| {
        let entry_seed = derive_seed(seed, 0, StreamTag::V);
        let lv = eigenvalues(&sample_matrix(spec_v, entry_seed)?.h)?;
        let lw = eigenvalues(&sample_matrix(spec_w, entry_seed)?.h)?;
        Ok((
            f.eval(counting_statistic(&lv, settings.e1, settings.e2, eta)?),
            f.eval(counting_statistic(&lw, settings.e1, settings.e2, eta)?),
        ))
    })?;
    let failed = out.failures.len();
    let samples: Vec<(usize, f64, f64)> = out.results.into_iter().map(|(k, (a, b))| (k, a, b)).collect();
    let fv: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let fw: Vec<f64> = samples.iter().map(|s| s.2).collect();
    let bs = derive_seed(settings.root_seed, 0, StreamTag::BOOTSTRAP);
    Ok(GfctReport {
        n,
        e1: settings.e1,
        e2: settings.e2,
        eta,
        trials_used: samples.len(),
        failed,
        expectation_v: bootstrap_ci(&fv, mean, settings.resamples, settings.level, bs)?,
        expectation_w: bootstrap_ci(&fw, mean, settings.resamples, settings.level, bs ^ 1)?,
        difference: paired_bootstrap_mean_diff(&fv, &fw, settings.resamples, settings.level, bs ^ 2)?,
        reference_scale: nf.powf(-1.0 / 6.0),
        samples,
    })
}
