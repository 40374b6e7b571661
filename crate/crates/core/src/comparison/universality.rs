//! Two-ensemble Monte Carlo comparison of joint eigenvalue / eigenvector observables.

use serde::{Deserialize, Serialize};

use super::observable::{ObservableSpec, ResolvedObservable};
use crate::ensembles::{sample_matrix, EnsembleConfig, EnsembleSpec};
use crate::error::{invalid, Result};
use crate::harness::seed::{derive_seed, StreamTag};
use crate::harness::stats::{bootstrap_ci, bootstrap_mean_diff, ks_two_sample, mean, Interval};
use crate::harness::trials::{run_trials, TrialSettings};
use crate::spectral::{eigendecompose, SpectralData};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSettings {
    pub trials: usize,
    pub root_seed: u64,
    /// 0 = all cores, 1 = sequential.
    pub parallelism: usize,
    pub resamples: usize,
    pub level: f64,
    /// Runs skipping more than this fraction of trials on either side are flagged.
    pub max_skip_fraction: f64,
}

impl ComparisonSettings {
    pub fn new(trials: usize, root_seed: u64) -> Self {
        Self {
            trials,
            root_seed,
            parallelism: 0,
            resamples: 1000,
            level: 0.95,
            max_skip_fraction: 0.05,
        }
    }

    /// Trial settings for size `n`; each size gets its own stream.
    pub fn for_size(&self, n: usize) -> TrialSettings {
        TrialSettings::new(self.trials, derive_seed(self.root_seed, n as u64, StreamTag::TRIAL))
            .with_parallelism(self.parallelism)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentKs {
    pub label: String,
    pub ks: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeComparison {
    pub n: usize,
    pub trial_root_seed: u64,
    pub trials: usize,
    pub used_v: usize,
    pub used_w: usize,
    pub skipped_v: usize,
    pub skipped_w: usize,
    pub failed: usize,
    pub skip_flagged: bool,
    pub ks: Vec<ComponentKs>,
    pub theta_v: Interval,
    pub theta_w: Interval,
    /// Mean of theta under v minus mean under w.
    pub theta_difference: Interval,
    /// Wall-clock time; kept out of the serialized body so reports stay byte-comparable.
    #[serde(skip)]
    pub elapsed_secs: f64,
    /// `(trial index, components)` for every used trial.
    #[serde(skip)]
    pub samples_v: Vec<(usize, Vec<f64>)>,
    #[serde(skip)]
    pub samples_w: Vec<(usize, Vec<f64>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub ensemble_v: String,
    pub ensemble_w: String,
    pub labels: Vec<String>,
    pub sizes: Vec<SizeComparison>,
}

impl ComparisonReport {
    /// KS distance of the first component at each size.
    pub fn ks_by_size(&self) -> Vec<(usize, f64)> {
        self.sizes.iter().map(|s| (s.n, s.ks[0].ks)).collect()
    }

    pub fn ks_nonincreasing(&self) -> bool {
        self.sizes.windows(2).all(|w| w[1].ks[0].ks <= w[0].ks[0].ks)
    }
}

/// Observable components of one sample, or `None` when an eigenvector it needs
/// belongs to a degenerate eigenvalue.
fn observe(spec: &EnsembleSpec, seed: u64, obs: &ResolvedObservable) -> Result<Option<Vec<f64>>> {
    let s = sample_matrix(spec, seed)?;
    let sd: SpectralData = eigendecompose(&s.h)?;
    if obs.vector_indices().any(|a| !sd.is_isolated(a)) {
        return Ok(None);
    }
    Ok(Some(obs.components(&sd)))
}

pub fn compare_at_size(
    spec_v: &EnsembleSpec,
    spec_w: &EnsembleSpec,
    obs: &ResolvedObservable,
    settings: &ComparisonSettings,
) -> Result<SizeComparison> {
    let n = spec_v.n();
    if spec_w.n() != n || obs.n != n {
        return Err(invalid("ensembles and observable must share N"));
    }
    let ts = settings.for_size(n);
    let out = run_trials(&ts, |_, seed| {
        let v = observe(spec_v, derive_seed(seed, 0, StreamTag::V), obs)?;
        let w = observe(spec_w, derive_seed(seed, 0, StreamTag::W), obs)?;
        Ok((v, w))
    })?;
    let failed = out.failures.len();
    let elapsed_secs = out.elapsed_secs;
    let (mut samples_v, mut samples_w) = (Vec::new(), Vec::new());
    for (k, (v, w)) in out.results {
        samples_v.extend(v.map(|c| (k, c)));
        samples_w.extend(w.map(|c| (k, c)));
    }
    let done = settings.trials - failed;
    let skipped_v = done - samples_v.len();
    let skipped_w = done - samples_w.len();
    if samples_v.is_empty() || samples_w.is_empty() {
        return Err(invalid(format!("every trial was skipped at N = {n}")));
    }
    let labels = obs.labels();
    let ks = labels
        .iter()
        .enumerate()
        .map(|(c, label)| {
            let a: Vec<f64> = samples_v.iter().map(|s| s.1[c]).collect();
            let b: Vec<f64> = samples_w.iter().map(|s| s.1[c]).collect();
            Ok(ComponentKs {
                label: label.clone(),
                ks: ks_two_sample(&a, &b)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let theta_v: Vec<f64> = samples_v.iter().map(|s| obs.theta(&s.1)).collect();
    let theta_w: Vec<f64> = samples_w.iter().map(|s| obs.theta(&s.1)).collect();
    let bs = derive_seed(ts.root_seed, 0, StreamTag::BOOTSTRAP);
    let skip_limit = settings.max_skip_fraction * done as f64;
    Ok(SizeComparison {
        n,
        trial_root_seed: ts.root_seed,
        trials: settings.trials,
        used_v: samples_v.len(),
        used_w: samples_w.len(),
        skipped_v,
        skipped_w,
        failed,
        skip_flagged: skipped_v as f64 > skip_limit || skipped_w as f64 > skip_limit,
        ks,
        theta_v: bootstrap_ci(&theta_v, mean, settings.resamples, settings.level, bs)?,
        theta_w: bootstrap_ci(&theta_w, mean, settings.resamples, settings.level, bs ^ 1)?,
        theta_difference: bootstrap_mean_diff(&theta_v, &theta_w, settings.resamples, settings.level, bs ^ 2)?,
        elapsed_secs,
        samples_v,
        samples_w,
    })
}

/// Runs [`compare_at_size`] for every `N` in `sizes`.
pub fn universality_experiment(
    ensemble_v: &EnsembleConfig,
    ensemble_w: &EnsembleConfig,
    observable: &ObservableSpec,
    sizes: &[usize],
    settings: &ComparisonSettings,
) -> Result<ComparisonReport> {
    if sizes.is_empty() {
        return Err(invalid("size list is empty"));
    }
    let mut out = Vec::with_capacity(sizes.len());
    let mut names = (String::new(), String::new());
    let mut labels = Vec::new();
    for &n in sizes {
        let sv = ensemble_v.build(n)?;
        let sw = ensemble_w.build(n)?;
        if sv.symmetry != sw.symmetry {
            return Err(invalid("compared ensembles must share the symmetry class"));
        }
        let obs = observable.resolve(n)?;
        labels = obs.labels();
        names = (sv.name.clone(), sw.name.clone());
        out.push(compare_at_size(&sv, &sw, &obs, settings)?);
    }
    Ok(ComparisonReport {
        ensemble_v: names.0,
        ensemble_w: names.1,
        labels,
        sizes: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comparison::observable::{IndexRegime, IndexSpec};
    use crate::ensembles::SymmetryClass;

    #[test]
    fn identical_ensembles_look_alike() {
        let cfg = EnsembleConfig::simple(SymmetryClass::ComplexHermitian, "gaussian");
        let obs = ObservableSpec::overlap(IndexSpec::Absolute(1), 1, IndexRegime::default());
        let mut st = ComparisonSettings::new(300, 11);
        st.resamples = 300;
        let r = universality_experiment(&cfg, &cfg, &obs, &[30, 40], &st).unwrap();
        assert_eq!(r.sizes.len(), 2);
        for s in &r.sizes {
            assert!(s.ks[0].ks < 0.15, "{}", s.ks[0].ks);
            assert!(s.theta_difference.contains(0.0) || s.theta_difference.low.abs().min(s.theta_difference.high.abs()) < 0.05);
            assert_eq!(s.used_v + s.skipped_v, 300);
            assert!(!s.skip_flagged);
            assert!(s.theta_v.low <= s.theta_v.estimate && s.theta_v.estimate <= s.theta_v.high);
        }
    }

    #[test]
    fn deterministic_and_parallelism_independent() {
        let v = EnsembleConfig::simple(SymmetryClass::RealSymmetric, "gaussian");
        let w = EnsembleConfig::simple(SymmetryClass::RealSymmetric, "rademacher");
        let obs = ObservableSpec::overlap(IndexSpec::Absolute(1), 1, IndexRegime::default());
        let mut st = ComparisonSettings::new(40, 5);
        st.resamples = 200;
        let a = universality_experiment(&v, &w, &obs, &[20], &st).unwrap();
        st.parallelism = 1;
        let b = universality_experiment(&v, &w, &obs, &[20], &st).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_eq!(a.sizes[0].samples_v, b.sizes[0].samples_v);
    }

    #[test]
    fn rejects_bad_observables_and_mixed_classes() {
        let v = EnsembleConfig::simple(SymmetryClass::RealSymmetric, "gaussian");
        let w = EnsembleConfig::simple(SymmetryClass::ComplexHermitian, "gaussian");
        let obs = ObservableSpec::overlap(IndexSpec::Absolute(1), 1, IndexRegime::default());
        let st = ComparisonSettings::new(10, 1);
        assert!(universality_experiment(&v, &w, &obs, &[10], &st).is_err());
        let bad = ObservableSpec::overlap(IndexSpec::Absolute(50), 1, IndexRegime::default());
        assert!(universality_experiment(&v, &v, &bad, &[100], &st).is_err());
        assert!(universality_experiment(&v, &v, &obs, &[], &st).is_err());
    }
}
