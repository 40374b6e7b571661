//! Parallel trial execution with a fixed reduction order.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::seed::{derive_seed, StreamTag};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialSettings {
    pub trials: usize,
    pub root_seed: u64,
    /// Worker threads; 0 uses the global rayon pool.
    pub parallelism: usize,
}

impl TrialSettings {
    pub fn new(trials: usize, root_seed: u64) -> Self {
        Self {
            trials,
            root_seed,
            parallelism: 0,
        }
    }

    pub fn with_parallelism(mut self, parallelism: usize) -> Self {
        self.parallelism = parallelism;
        self
    }

    /// Seed of trial `index`.
    pub fn trial_seed(&self, index: usize) -> u64 {
        derive_seed(self.root_seed, index as u64, StreamTag::TRIAL)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialFailure {
    pub trial: usize,
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct TrialOutcome<T> {
    /// Successful results as `(trial index, value)`, sorted by trial index.
    pub results: Vec<(usize, T)>,
    pub failures: Vec<TrialFailure>,
    pub elapsed_secs: f64,
    pub per_trial_secs: Vec<f64>,
}

impl<T> TrialOutcome<T> {
    pub fn values(&self) -> impl Iterator<Item = &T> {
        self.results.iter().map(|(_, v)| v)
    }

    pub fn into_values(self) -> Vec<T> {
        self.results.into_iter().map(|(_, v)| v).collect()
    }

    pub fn throughput(&self) -> f64 {
        (self.results.len() + self.failures.len()) as f64 / self.elapsed_secs.max(1e-12)
    }
}

/// Runs `task(trial_index, trial_seed)` for every trial.
///
/// Results are identical for any `parallelism`: each trial sees only its own seed
/// and results are collected in trial order. Failing trials are recorded and
/// excluded; more than 1% failures turns the whole run into an error.
pub fn run_trials<T, F>(settings: &TrialSettings, task: F) -> Result<TrialOutcome<T>>
where
    T: Send,
    F: Fn(usize, u64) -> Result<T> + Sync + Send,
{
    if settings.trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    let start = Instant::now();
    let run_one = |k: usize| {
        let t0 = Instant::now();
        let seed = settings.trial_seed(k);
        let r = task(k, seed);
        (k, seed, r, t0.elapsed().as_secs_f64())
    };
    let raw: Vec<_> = if settings.parallelism == 0 {
        (0..settings.trials).into_par_iter().map(run_one).collect()
    } else if settings.parallelism == 1 {
        (0..settings.trials).map(run_one).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(settings.parallelism)
            .build()
            .map_err(|e| invalid(format!("cannot build worker pool: {e}")))?;
        pool.install(|| (0..settings.trials).into_par_iter().map(run_one).collect())
    };
    let mut results = Vec::with_capacity(raw.len());
    let mut failures = Vec::new();
    let mut per_trial_secs = Vec::with_capacity(raw.len());
    for (k, seed, r, secs) in raw {
        per_trial_secs.push(secs);
        match r {
            Ok(v) => results.push((k, v)),
            Err(e) => failures.push(TrialFailure {
                trial: k,
                seed,
                message: e.to_string(),
            }),
        }
    }
    if failures.len() * 100 > settings.trials {
        return Err(Error::TrialFailures {
            failed: failures.len(),
            total: settings.trials,
            first: failures[0].message.clone(),
        });
    }
    Ok(TrialOutcome {
        results,
        failures,
        elapsed_secs: start.elapsed().as_secs_f64(),
        per_trial_secs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::seed::stream_rng;
    use rand::Rng;

    #[test]
    fn parallelism_does_not_change_results() {
        let task = |k: usize, seed: u64| -> Result<f64> {
            let mut rng = stream_rng(seed, 0, StreamTag::ORACLE);
            Ok((0..100).map(|_| rng.random::<f64>()).sum::<f64>() + k as f64)
        };
        let s1 = TrialSettings::new(64, 42).with_parallelism(1);
        let s8 = TrialSettings::new(64, 42).with_parallelism(8);
        let a: Vec<f64> = run_trials(&s1, task).unwrap().into_values();
        let b: Vec<f64> = run_trials(&s8, task).unwrap().into_values();
        let c: Vec<f64> = run_trials(&TrialSettings::new(64, 42), task).unwrap().into_values();
        assert_eq!(a.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), b.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
        assert_eq!(a, c);
    }

    #[test]
    fn constant_task() {
        let out = run_trials(&TrialSettings::new(100, 1), |_, _| Ok(7u32)).unwrap();
        assert_eq!(out.results.len(), 100);
        assert!(out.values().all(|v| *v == 7));
        assert!(out.failures.is_empty());
    }

    #[test]
    fn failures_are_isolated_or_fatal() {
        let s = TrialSettings::new(200, 3);
        let out = run_trials(&s, |k, _| if k == 5 { Err(invalid("boom")) } else { Ok(k) }).unwrap();
        assert_eq!(out.results.len(), 199);
        assert_eq!(out.failures.len(), 1);
        assert_eq!(out.failures[0].trial, 5);
        let err = run_trials(&s, |k, _| if k % 50 == 0 { Err(invalid("boom")) } else { Ok(k) }).unwrap_err();
        assert!(matches!(err, Error::TrialFailures { failed: 4, total: 200, .. }));
        assert!(run_trials(&TrialSettings::new(0, 1), |_, _| Ok(())).is_err());
    }
}
