//! Experiment drivers behind the command-line subcommands.
//!
//! Every driver is a pure function of its [`ExperimentConfig`]: sizes are run in
//! the configured order, size `N` draws its trials from the root
//! `derive_seed(seed, N, TRIAL)`, and trial `k` samples its matrix from
//! `derive_seed(trial_seed_k, 0, V)`. Each per-size table records its trial root
//! and every failed trial with its seed.

mod comparisons;
mod edge;
mod selftest;
mod spectra;

use serde::Serialize;
use serde_json::Value;

use super::config::{ExperimentConfig, ExperimentKind};
use super::report::{now_unix_ms, Check, CsvTable, ExperimentReport, Metadata, Summary, SCHEMA};
use super::seed::{derive_seed, StreamTag};
use super::trials::{run_trials, TrialFailure, TrialOutcome, TrialSettings};
use crate::error::Result;

pub use selftest::selftest_checks;

/// A finished run: the report and the optional per-trial table.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: ExperimentReport,
    pub csv: CsvTable,
}

struct DriverOutput {
    results: Value,
    checks: Vec<Check>,
    csv: CsvTable,
}

#[derive(Default)]
struct Timing {
    trials_run: usize,
    trial_secs: f64,
}

impl Timing {
    fn add<T>(&mut self, out: &TrialOutcome<T>) {
        self.trials_run += out.results.len() + out.failures.len();
        self.trial_secs += out.per_trial_secs.iter().sum::<f64>();
    }

    fn add_phase(&mut self, trials: usize, secs: f64) {
        self.trials_run += trials;
        self.trial_secs += secs;
    }
}

/// Common head of every per-size table.
#[derive(Debug, Clone, Serialize)]
struct SizeHead {
    n: usize,
    trial_root_seed: u64,
    trials: usize,
    failures: Vec<TrialFailure>,
}

fn size_settings(cfg: &ExperimentConfig, n: usize) -> TrialSettings {
    TrialSettings::new(cfg.trials, derive_seed(cfg.seed, n as u64, StreamTag::TRIAL)).with_parallelism(cfg.parallelism)
}

/// Runs `task(trial, trial_seed, matrix_seed)` for every trial at size `n`.
fn trials_at<T, F>(cfg: &ExperimentConfig, n: usize, timing: &mut Timing, task: F) -> Result<(SizeHead, Vec<(usize, T)>)>
where
    T: Send,
    F: Fn(usize, u64, u64) -> Result<T> + Sync + Send,
{
    let ts = size_settings(cfg, n);
    let out = run_trials(&ts, |k, seed| task(k, seed, derive_seed(seed, 0, StreamTag::V)))?;
    timing.add(&out);
    let head = SizeHead {
        n,
        trial_root_seed: ts.root_seed,
        trials: cfg.trials,
        failures: out.failures,
    };
    Ok((head, out.results))
}

fn fraction(hits: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        hits as f64 / total as f64
    }
}

/// Runs the experiment described by `cfg`, which is validated first.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let started = now_unix_ms();
    let clock = std::time::Instant::now();
    let mut timing = Timing::default();
    let out = match cfg.experiment {
        ExperimentKind::Sample => spectra::sample(cfg, &mut timing)?,
        ExperimentKind::Locallaw => spectra::locallaw(cfg, &mut timing)?,
        ExperimentKind::Rigidity => spectra::rigidity(cfg, &mut timing)?,
        ExperimentKind::Deloc => spectra::deloc(cfg, &mut timing)?,
        ExperimentKind::Repulsion => edge::repulsion(cfg, &mut timing)?,
        ExperimentKind::Reconstruct => edge::reconstruct(cfg, &mut timing)?,
        ExperimentKind::HsCheck => edge::hs_check(cfg, &mut timing)?,
        ExperimentKind::Compare => comparisons::compare(cfg, &mut timing)?,
        ExperimentKind::Gfct => comparisons::gfct(cfg, &mut timing)?,
        ExperimentKind::Selftest => selftest::run()?,
    };
    let elapsed_secs = clock.elapsed().as_secs_f64();
    let threads = if cfg.parallelism == 0 {
        rayon::current_num_threads()
    } else {
        cfg.parallelism
    };
    let report = ExperimentReport {
        schema: SCHEMA.into(),
        experiment: cfg.experiment,
        config: cfg.clone(),
        results: out.results,
        summary: Summary::new(out.checks),
        metadata: Metadata {
            started_unix_ms: started,
            finished_unix_ms: now_unix_ms(),
            elapsed_secs,
            trials_run: timing.trials_run,
            trial_secs_total: timing.trial_secs,
            trial_secs_mean: timing.trial_secs / timing.trials_run.max(1) as f64,
            threads,
            version: env!("CARGO_PKG_VERSION").into(),
        },
    };
    Ok(RunOutput { report, csv: out.csv })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::report::validate_report;

    fn small(kind: ExperimentKind) -> ExperimentConfig {
        let mut c = ExperimentConfig::defaults(kind);
        c.sizes = vec![40];
        c.trials = 6;
        c.seed = 5;
        c.knobs.resamples = 200;
        c
    }

    #[test]
    fn every_experiment_produces_a_valid_report() {
        for kind in ExperimentKind::ALL {
            let mut c = small(kind);
            if kind == ExperimentKind::Compare {
                c.observable = Some(c.default_observable());
            }
            let out = run_experiment(&c).unwrap_or_else(|e| panic!("{kind}: {e}"));
            let v: Value = serde_json::from_str(&out.report.to_json().unwrap()).unwrap();
            validate_report(&v).unwrap_or_else(|e| panic!("{kind}: {e}"));
            assert_eq!(out.report.experiment, kind);
            if kind != ExperimentKind::Selftest {
                assert!(!out.csv.rows.is_empty(), "{kind}");
            }
        }
    }

    #[test]
    fn body_is_independent_of_parallelism() {
        for kind in [ExperimentKind::Rigidity, ExperimentKind::Compare, ExperimentKind::Reconstruct] {
            let mut a = small(kind);
            a.parallelism = 1;
            let mut b = a.clone();
            b.parallelism = 3;
            let ra = run_experiment(&a).unwrap();
            let rb = run_experiment(&b).unwrap();
            let strip = |r: &RunOutput| {
                let mut v = serde_json::to_value(&r.report).unwrap();
                v.as_object_mut().unwrap().remove("metadata");
                v["config"].as_object_mut().unwrap().remove("parallelism");
                v
            };
            assert_eq!(strip(&ra), strip(&rb), "{kind}");
            assert_eq!(ra.csv, rb.csv);
        }
    }

    #[test]
    fn seed_changes_the_body() {
        let a = small(ExperimentKind::Rigidity);
        let mut b = a.clone();
        b.seed += 1;
        let ra = run_experiment(&a).unwrap().report.body_json().unwrap();
        let rb = run_experiment(&b).unwrap().report.body_json().unwrap();
        assert_ne!(ra, rb);
    }

    #[test]
    fn invalid_config_is_rejected_before_running() {
        let mut c = small(ExperimentKind::Rigidity);
        c.trials = 0;
        assert!(matches!(run_experiment(&c), Err(crate::Error::Config(_))));
    }
}
