//! Two-ensemble experiments: compare, gfct.

use super::{DriverOutput, Timing};
use crate::comparison::{gfct_statistic, universality_experiment, ComparisonSettings, GfctSettings};
use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;
use crate::harness::report::{cell, Check, CsvTable};
use crate::harness::seed::{derive_seed, StreamTag};
use crate::harness::trials::TrialSettings;

fn second(cfg: &ExperimentConfig) -> Result<&crate::ensembles::EnsembleConfig> {
    cfg.ensemble_w
        .as_ref()
        .ok_or_else(|| Error::Config(format!("{} needs a second ensemble", cfg.experiment)))
}

pub(super) fn compare(cfg: &ExperimentConfig, timing: &mut Timing) -> Result<DriverOutput> {
    let k = &cfg.knobs;
    let w = second(cfg)?;
    let observable = cfg.observable.clone().unwrap_or_else(|| cfg.default_observable());
    let settings = ComparisonSettings {
        trials: cfg.trials,
        root_seed: cfg.seed,
        parallelism: cfg.parallelism,
        resamples: k.resamples,
        level: k.level,
        max_skip_fraction: k.max_skip_fraction,
    };
    let report = universality_experiment(&cfg.ensemble, w, &observable, &cfg.sizes, &settings)?;
    let mut header = vec!["n", "ensemble", "trial", "seed"];
    header.extend(report.labels.iter().map(String::as_str));
    header.push("theta");
    let mut csv = CsvTable::new(&header);
    let obs_by_n: Vec<_> = cfg.sizes.iter().map(|&n| observable.resolve(n)).collect::<Result<_>>()?;
    let mut checks = Vec::new();
    for (s, obs) in report.sizes.iter().zip(&obs_by_n) {
        timing.add_phase(s.trials, s.elapsed_secs);
        let ts = TrialSettings::new(s.trials, s.trial_root_seed);
        for (side, samples) in [("v", &s.samples_v), ("w", &s.samples_w)] {
            for (t, comps) in samples {
                let mut row = vec![s.n.to_string(), side.to_string(), t.to_string(), ts.trial_seed(*t).to_string()];
                row.extend(comps.iter().map(|&c| cell(c)));
                row.push(cell(obs.theta(comps)));
                csv.push(row);
            }
        }
        checks.push(Check::flag("skip_fraction_within_limit", Some(s.n), !s.skip_flagged));
    }
    if let Some(last) = report.sizes.last() {
        for c in &last.ks {
            checks.push(Check::at_most(format!("ks_{}", c.label), Some(last.n), c.ks, k.ks_threshold));
        }
    }
    if report.sizes.len() > 1 {
        checks.push(Check::flag("ks_nonincreasing_in_n", None, report.ks_nonincreasing()));
    }
    Ok(DriverOutput {
        results: serde_json::to_value(&report)?,
        checks,
        csv,
    })
}

pub(super) fn gfct(cfg: &ExperimentConfig, timing: &mut Timing) -> Result<DriverOutput> {
    let k = &cfg.knobs;
    let w = second(cfg)?;
    let mut csv = CsvTable::new(&["n", "trial", "seed", "f_v", "f_w"]);
    let mut sizes = Vec::new();
    let mut checks = Vec::new();
    for &n in &cfg.sizes {
        let sv = cfg.ensemble.build(n)?;
        let sw = w.build(n)?;
        let scale = (n as f64).powf(-2.0 / 3.0);
        let root = derive_seed(cfg.seed, n as u64, StreamTag::TRIAL);
        let mut st = GfctSettings::new(
            -2.0 + k.gfct_window[0] * scale,
            -2.0 + k.gfct_window[1] * scale,
            k.eps,
            cfg.trials,
            root,
        );
        st.parallelism = cfg.parallelism;
        st.resamples = k.resamples;
        st.level = k.level;
        let clock = std::time::Instant::now();
        let r = gfct_statistic(&sv, &sw, &cfg.function, &st).map_err(|e| match e {
            Error::InvalidParameter(m) => Error::Config(m),
            other => other,
        })?;
        timing.add_phase(cfg.trials, clock.elapsed().as_secs_f64());
        let ts = TrialSettings::new(cfg.trials, root);
        for (t, a, b) in &r.samples {
            csv.push(vec![n.to_string(), t.to_string(), ts.trial_seed(*t).to_string(), cell(*a), cell(*b)]);
        }
        checks.push(Check::flag("difference_within_reference", Some(n), r.consistent_with_reference(k.gfct_factor)));
        sizes.push(serde_json::json!({
            "trial_root_seed": root,
            "report": serde_json::to_value(&r)?,
        }));
    }
    Ok(DriverOutput {
        results: serde_json::json!({ "function": serde_json::to_value(cfg.function)?, "sizes": sizes }),
        checks,
        csv,
    })
}
