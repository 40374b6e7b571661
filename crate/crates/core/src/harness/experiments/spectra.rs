//! Single-ensemble spectral experiments: sample, locallaw, rigidity, deloc.

use serde::Serialize;

use super::{fraction, trials_at, DriverOutput, SizeHead, Timing};
use crate::ensembles::{sample_matrix, summarize, SampleSummary};
use crate::error::Result;
use crate::harness::config::ExperimentConfig;
use crate::harness::report::{cell, Check, CsvTable};
use crate::harness::stats::{mean, median};
use crate::resolvent::{counting_sandwich, edge_grid, local_law_audit, log_factor, sharp_vs_smooth_gap, AuditGrid};
use crate::semicircle::ClassicalLocations;
use crate::spectral::{delocalization_stat, eigendecompose, eigenvalues, rigidity_profile};

#[derive(Serialize)]
struct SampleSize {
    #[serde(flatten)]
    head: SizeHead,
    ensemble: String,
    all_hermitian: bool,
    mean_trace: f64,
    /// `N` times the mean squared off-diagonal entry; 1 for a flat profile.
    scaled_second_moment: f64,
    mean_lambda_min: f64,
    mean_lambda_max: f64,
}

struct SampleTrial {
    seed: u64,
    summary: SampleSummary,
    hermitian: bool,
    lambda: Vec<f64>,
}

pub(super) fn sample(cfg: &ExperimentConfig, timing: &mut Timing) -> Result<DriverOutput> {
    let mut csv = CsvTable::new(&["n", "trial", "seed", "alpha", "lambda", "gamma", "deviation"]);
    let mut sizes = Vec::new();
    let mut checks = Vec::new();
    for &n in &cfg.sizes {
        let spec = cfg.ensemble.build(n)?;
        let gamma = ClassicalLocations::new(n)?;
        let (head, rows) = trials_at(cfg, n, timing, |_, seed, mseed| {
            let s = sample_matrix(&spec, mseed)?;
            let lambda = eigenvalues(&s.h)?;
            Ok(SampleTrial {
                seed,
                summary: summarize(&s),
                hermitian: s.h.is_hermitian(),
                lambda,
            })
        })?;
        for (k, r) in &rows {
            for (a, l) in r.lambda.iter().enumerate() {
                let g = gamma.get(a + 1);
                csv.push(vec![
                    n.to_string(),
                    k.to_string(),
                    r.seed.to_string(),
                    (a + 1).to_string(),
                    cell(*l),
                    cell(g),
                    cell(l - g),
                ]);
            }
        }
        let pick = |f: &dyn Fn(&SampleTrial) -> f64| mean(&rows.iter().map(|(_, r)| f(r)).collect::<Vec<_>>());
        let all_hermitian = rows.iter().all(|(_, r)| r.hermitian);
        checks.push(Check::flag("hermitian", Some(n), all_hermitian));
        sizes.push(SampleSize {
            ensemble: spec.name.clone(),
            all_hermitian,
            mean_trace: pick(&|r| r.summary.trace),
            scaled_second_moment: n as f64 * pick(&|r| r.summary.off_diagonal_second_moment),
            mean_lambda_min: pick(&|r| r.lambda[0]),
            mean_lambda_max: pick(&|r| r.lambda[n - 1]),
            head,
        });
    }
    Ok(DriverOutput {
        results: serde_json::json!({ "sizes": serde_json::to_value(sizes)? }),
        checks,
        csv,
    })
}

#[derive(Serialize)]
struct GridSummary {
    e: f64,
    eta: f64,
    max_average_ratio: f64,
    median_average_ratio: f64,
    max_entrywise_ratio: f64,
    median_entrywise_ratio: f64,
}

#[derive(Serialize)]
struct LocalLawSize {
    #[serde(flatten)]
    head: SizeHead,
    log_power: f64,
    eps: f64,
    audited: usize,
    average_pass_rate: f64,
    entrywise_pass_rate: f64,
    norm_pass_rate: f64,
    sandwich_pass_rate: f64,
    sharp_smooth_pass_rate: f64,
    overall_pass_rate: f64,
    max_norm_ratio: f64,
    edge_energies: Vec<f64>,
    grid: Vec<GridSummary>,
}

struct LocalLawTrial {
    audit: crate::resolvent::LocalLawAudit,
    sandwich_ok: bool,
    gap_ok: bool,
}

pub(super) fn locallaw(cfg: &ExperimentConfig, timing: &mut Timing) -> Result<DriverOutput> {
    let k = &cfg.knobs;
    let mut csv = CsvTable::new(&[
        "n",
        "trial",
        "seed",
        "e",
        "eta",
        "lambda_d",
        "lambda_o",
        "average_ratio",
        "entrywise_ratio",
    ]);
    let mut sizes = Vec::new();
    let mut checks = Vec::new();
    for &n in &cfg.sizes {
        let spec = cfg.ensemble.build(n)?;
        let grid = AuditGrid::standard(n);
        let energies = edge_grid(n, k.edge_log_power, k.edge_points);
        let (head, rows) = trials_at(cfg, n, timing, |_, seed, mseed| {
            let sd = eigendecompose(&sample_matrix(&spec, mseed)?.h)?;
            let audit = local_law_audit(&sd, &grid, k.log_power)?;
            let mut sandwich_ok = true;
            let mut gap_ok = true;
            for &e in &energies {
                sandwich_ok &= counting_sandwich(&sd.lambda, e, k.eps, k.edge_log_power)?.holds;
                gap_ok &= sharp_vs_smooth_gap(&sd.lambda, e, k.eps, k.gap_constant, k.edge_log_power)?.holds;
            }
            Ok((seed, LocalLawTrial { audit, sandwich_ok, gap_ok }))
        })?;
        for (t, (seed, r)) in &rows {
            for p in &r.audit.points {
                csv.push(vec![
                    n.to_string(),
                    t.to_string(),
                    seed.to_string(),
                    cell(p.e),
                    cell(p.eta),
                    cell(p.lambda_d),
                    cell(p.lambda_o),
                    cell(p.average_ratio),
                    cell(p.entrywise_ratio),
                ]);
            }
        }
        let m = rows.len();
        let rate = |f: &dyn Fn(&LocalLawTrial) -> bool| fraction(rows.iter().filter(|(_, (_, r))| f(r)).count(), m);
        let grid_summary = grid
            .points
            .iter()
            .enumerate()
            .map(|(g, p)| {
                let avg: Vec<f64> = rows.iter().map(|(_, (_, r))| r.audit.points[g].average_ratio).collect();
                let ent: Vec<f64> = rows.iter().map(|(_, (_, r))| r.audit.points[g].entrywise_ratio).collect();
                GridSummary {
                    e: p.e,
                    eta: p.eta,
                    max_average_ratio: avg.iter().copied().fold(0.0, f64::max),
                    median_average_ratio: median(&avg),
                    max_entrywise_ratio: ent.iter().copied().fold(0.0, f64::max),
                    median_entrywise_ratio: median(&ent),
                }
            })
            .collect();
        let s = LocalLawSize {
            log_power: k.log_power,
            eps: k.eps,
            audited: m,
            average_pass_rate: rate(&|r| r.audit.average_ok),
            entrywise_pass_rate: rate(&|r| r.audit.entrywise_ok),
            norm_pass_rate: rate(&|r| r.audit.norm_ok),
            sandwich_pass_rate: rate(&|r| r.sandwich_ok),
            sharp_smooth_pass_rate: rate(&|r| r.gap_ok),
            overall_pass_rate: rate(&|r| r.audit.passes() && r.sandwich_ok && r.gap_ok),
            max_norm_ratio: rows.iter().map(|(_, (_, r))| r.audit.norm_ratio).fold(f64::NEG_INFINITY, f64::max),
            edge_energies: energies.clone(),
            grid: grid_summary,
            head,
        };
        for (name, v) in [
            ("average_law_pass_rate", s.average_pass_rate),
            ("entrywise_law_pass_rate", s.entrywise_pass_rate),
            ("norm_bound_pass_rate", s.norm_pass_rate),
            ("counting_sandwich_pass_rate", s.sandwich_pass_rate),
            ("sharp_smooth_gap_pass_rate", s.sharp_smooth_pass_rate),
        ] {
            checks.push(Check::at_least(name, Some(n), v, k.pass_rate));
        }
        sizes.push(s);
    }
    Ok(DriverOutput {
        results: serde_json::json!({ "sizes": serde_json::to_value(sizes)? }),
        checks,
        csv,
    })
}

#[derive(Serialize)]
struct RigiditySize {
    #[serde(flatten)]
    head: SizeHead,
    log_power: f64,
    threshold: f64,
    pass_rate: f64,
    max_worst_ratio: f64,
    median_worst_ratio: f64,
}

pub(super) fn rigidity(cfg: &ExperimentConfig, timing: &mut Timing) -> Result<DriverOutput> {
    let p = cfg.knobs.log_power;
    let mut csv = CsvTable::new(&["n", "trial", "seed", "worst_ratio", "worst_alpha", "within"]);
    let mut sizes = Vec::new();
    let mut checks = Vec::new();
    for &n in &cfg.sizes {
        let spec = cfg.ensemble.build(n)?;
        let (head, rows) = trials_at(cfg, n, timing, |_, seed, mseed| {
            let r = rigidity_profile(&eigenvalues(&sample_matrix(&spec, mseed)?.h)?, p)?;
            Ok((seed, r.worst_ratio, r.worst_alpha, r.within))
        })?;
        for (t, (seed, w, a, ok)) in &rows {
            csv.push(vec![n.to_string(), t.to_string(), seed.to_string(), cell(*w), a.to_string(), ok.to_string()]);
        }
        let worst: Vec<f64> = rows.iter().map(|(_, r)| r.1).collect();
        let s = RigiditySize {
            log_power: p,
            threshold: log_factor(n, p),
            pass_rate: fraction(rows.iter().filter(|(_, r)| r.3).count(), rows.len()),
            max_worst_ratio: worst.iter().copied().fold(0.0, f64::max),
            median_worst_ratio: median(&worst),
            head,
        };
        checks.push(Check::at_least("rigidity_pass_rate", Some(n), s.pass_rate, cfg.knobs.pass_rate));
        sizes.push(s);
    }
    Ok(DriverOutput {
        results: serde_json::json!({ "sizes": serde_json::to_value(sizes)? }),
        checks,
        csv,
    })
}

#[derive(Serialize)]
struct DelocSize {
    #[serde(flatten)]
    head: SizeHead,
    log_power: f64,
    threshold: f64,
    pass_rate: f64,
    max_stat: f64,
    /// Means of `N |u_1(1)|^2` and `N |u_{N/2}(1)|^2`; both tend to 1.
    mean_edge_overlap: f64,
    mean_bulk_overlap: f64,
}

pub(super) fn deloc(cfg: &ExperimentConfig, timing: &mut Timing) -> Result<DriverOutput> {
    let p = cfg.knobs.log_power;
    let mut csv = CsvTable::new(&["n", "trial", "seed", "max_scaled_component", "edge_overlap", "bulk_overlap"]);
    let mut sizes = Vec::new();
    let mut checks = Vec::new();
    for &n in &cfg.sizes {
        let spec = cfg.ensemble.build(n)?;
        let nf = n as f64;
        let bulk = (n / 2).max(1);
        let (head, rows) = trials_at(cfg, n, timing, |_, seed, mseed| {
            let sd = eigendecompose(&sample_matrix(&spec, mseed)?.h)?;
            Ok((
                seed,
                delocalization_stat(&sd),
                nf * sd.component(1, 1).norm_sqr(),
                nf * sd.component(bulk, 1).norm_sqr(),
            ))
        })?;
        let threshold = log_factor(n, p);
        for (t, (seed, s, e, b)) in &rows {
            csv.push(vec![n.to_string(), t.to_string(), seed.to_string(), cell(*s), cell(*e), cell(*b)]);
        }
        let s = DelocSize {
            log_power: p,
            threshold,
            pass_rate: fraction(rows.iter().filter(|(_, r)| r.1 <= threshold).count(), rows.len()),
            max_stat: rows.iter().map(|(_, r)| r.1).fold(0.0, f64::max),
            mean_edge_overlap: mean(&rows.iter().map(|(_, r)| r.2).collect::<Vec<_>>()),
            mean_bulk_overlap: mean(&rows.iter().map(|(_, r)| r.3).collect::<Vec<_>>()),
            head,
        };
        checks.push(Check::at_least("delocalization_pass_rate", Some(n), s.pass_rate, cfg.knobs.pass_rate));
        sizes.push(s);
    }
    Ok(DriverOutput {
        results: serde_json::json!({ "sizes": serde_json::to_value(sizes)? }),
        checks,
        csv,
    })
}
