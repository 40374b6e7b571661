//! Edge experiments: repulsion, reconstruct, hs-check.

use serde::Serialize;

use super::{fraction, trials_at, DriverOutput, SizeHead, Timing};
use crate::comparison::{repulsion_from_spectra, window_half_width, RepulsionReport};
use crate::ensembles::sample_matrix;
use crate::error::Result;
use crate::harness::config::ExperimentConfig;
use crate::harness::report::{cell, Check, CsvTable};
use crate::harness::stats::{median, quantile};
use crate::resolvent::{direct_trace, hs_trace, reconstruct_overlap_edge, reconstruct_overlap_smoothed, SmoothedIndicator};
use crate::semicircle::classical_location;
use crate::spectral::{count_eigenvalues, eigendecompose, eigenvector_overlap, eigenvalues, Region};

#[derive(Serialize)]
struct RepulsionSize {
    #[serde(flatten)]
    head: SizeHead,
    #[serde(flatten)]
    report: RepulsionReport,
}

pub(super) fn repulsion(cfg: &ExperimentConfig, timing: &mut Timing) -> Result<DriverOutput> {
    let k = &cfg.knobs;
    let mut csv = CsvTable::new(&["n", "trial", "seed", "e", "count"]);
    let mut sizes = Vec::new();
    let mut checks = Vec::new();
    for &n in &cfg.sizes {
        let spec = cfg.ensemble.build(n)?;
        let grid = if k.energies.is_empty() {
            match k.region {
                Region::Edge => vec![classical_location(1, n)?],
                Region::Bulk => vec![0.0],
            }
        } else {
            k.energies.clone()
        };
        let (head, rows) = trials_at(cfg, n, timing, |_, seed, mseed| {
            Ok((seed, eigenvalues(&sample_matrix(&spec, mseed)?.h)?))
        })?;
        let w = window_half_width(n, k.region, k.alpha_exp);
        for (t, (seed, l)) in &rows {
            for &e in &grid {
                let c = count_eigenvalues(l, e - w, e + w)?;
                csv.push(vec![n.to_string(), t.to_string(), seed.to_string(), cell(e), c.to_string()]);
            }
        }
        let spectra: Vec<Vec<f64>> = rows.into_iter().map(|(_, (_, l))| l).collect();
        let report = repulsion_from_spectra(&spectra, k.region, k.alpha_exp, &grid, k.level)?;
        let worst = report.points.iter().map(|p| p.ci_high).fold(0.0, f64::max);
        checks.push(Check::at_most("repulsion_ci_high_below_reference", Some(n), worst, report.reference));
        sizes.push(RepulsionSize { head, report });
    }
    Ok(DriverOutput {
        results: serde_json::json!({ "sizes": serde_json::to_value(sizes)? }),
        checks,
        csv,
    })
}

#[derive(Serialize)]
struct ReconstructSize {
    #[serde(flatten)]
    head: SizeHead,
    alpha: usize,
    i: usize,
    j: usize,
    eta: f64,
    shift: f64,
    window: (f64, f64),
    quality_trials: usize,
    skip_fraction: f64,
    median_relative_error: f64,
    p90_relative_error: f64,
    smoothed_median_relative_error: Option<f64>,
}

struct ReconstructTrial {
    seed: u64,
    direct: crate::Complex64,
    sharp: crate::Complex64,
    smoothed: Option<crate::Complex64>,
    quality: bool,
}

fn relative_error(a: crate::Complex64, b: crate::Complex64) -> f64 {
    let d = b.norm();
    if d > 0.0 {
        (a - b).norm() / d
    } else {
        (a - b).norm()
    }
}

pub(super) fn reconstruct(cfg: &ExperimentConfig, timing: &mut Timing) -> Result<DriverOutput> {
    let k = &cfg.knobs;
    let params = k.reconstruction();
    let mut csv = CsvTable::new(&[
        "n",
        "trial",
        "seed",
        "direct_re",
        "direct_im",
        "reconstructed_re",
        "reconstructed_im",
        "smoothed_re",
        "smoothed_im",
        "quality",
        "relative_error",
    ]);
    let mut sizes = Vec::new();
    let mut checks = Vec::new();
    for &n in &cfg.sizes {
        let spec = cfg.ensemble.build(n)?;
        let (head, rows) = trials_at(cfg, n, timing, |_, seed, mseed| {
            let sd = eigendecompose(&sample_matrix(&spec, mseed)?.h)?;
            let direct = eigenvector_overlap(&sd, k.alpha, k.i, k.j)?;
            let r = reconstruct_overlap_edge(&sd, k.alpha, k.i, k.j, &params)?;
            let smoothed = if k.smoothed {
                Some(reconstruct_overlap_smoothed(&sd, k.alpha, k.i, k.j, &params)?.value)
            } else {
                None
            };
            Ok(ReconstructTrial {
                seed,
                direct,
                sharp: r.value,
                smoothed,
                quality: r.quality,
            })
        })?;
        let mut errors = Vec::new();
        let mut smooth_errors = Vec::new();
        for (t, r) in &rows {
            let err = relative_error(r.sharp, r.direct);
            if r.quality {
                errors.push(err);
                if let Some(s) = r.smoothed {
                    smooth_errors.push(relative_error(s, r.direct));
                }
            }
            let (sre, sim) = r.smoothed.map_or((String::new(), String::new()), |s| (cell(s.re), cell(s.im)));
            csv.push(vec![
                n.to_string(),
                t.to_string(),
                r.seed.to_string(),
                cell(r.direct.re),
                cell(r.direct.im),
                cell(r.sharp.re),
                cell(r.sharp.im),
                sre,
                sim,
                r.quality.to_string(),
                cell(err),
            ]);
        }
        let used = rows.len();
        let s = ReconstructSize {
            alpha: k.alpha,
            i: k.i,
            j: k.j,
            eta: params.eta(n),
            shift: params.shift(n),
            window: params.window(n),
            quality_trials: errors.len(),
            skip_fraction: 1.0 - fraction(errors.len(), used),
            median_relative_error: median(&errors),
            p90_relative_error: quantile(&errors, 0.9),
            smoothed_median_relative_error: k.smoothed.then(|| median(&smooth_errors)),
            head,
        };
        // NaN medians (no quality trials) fail the comparison below.
        checks.push(Check::at_most(
            "median_relative_error",
            Some(n),
            s.median_relative_error,
            k.median_tolerance,
        ));
        if let Some(m) = s.smoothed_median_relative_error {
            checks.push(Check::at_most("smoothed_median_relative_error", Some(n), m, k.median_tolerance));
        }
        checks.push(Check::at_most("skip_fraction", Some(n), s.skip_fraction, k.max_skip_fraction));
        sizes.push(s);
    }
    Ok(DriverOutput {
        results: serde_json::json!({ "sizes": serde_json::to_value(sizes)? }),
        checks,
        csv,
    })
}

#[derive(Serialize)]
struct HsSize {
    #[serde(flatten)]
    head: SizeHead,
    e1: f64,
    e2: f64,
    eta_d: f64,
    max_relative_error: f64,
    median_relative_error: f64,
    max_dropped_strip_bound: f64,
}

pub(super) fn hs_check(cfg: &ExperimentConfig, timing: &mut Timing) -> Result<DriverOutput> {
    let k = &cfg.knobs;
    let f = SmoothedIndicator::new(k.hs_interval[0], k.hs_interval[1], k.eta_d)?;
    let mut csv = CsvTable::new(&["n", "trial", "seed", "hs_trace", "direct_trace", "relative_error", "evaluations"]);
    let mut sizes = Vec::new();
    let mut checks = Vec::new();
    for &n in &cfg.sizes {
        let spec = cfg.ensemble.build(n)?;
        let (head, rows) = trials_at(cfg, n, timing, |_, seed, mseed| {
            let lambda = eigenvalues(&sample_matrix(&spec, mseed)?.h)?;
            let hs = hs_trace(&lambda, &f, k.chi_half_width, k.quad_tol)?;
            Ok((seed, hs, direct_trace(&lambda, &f)))
        })?;
        let mut errors = Vec::new();
        for (t, (seed, hs, direct)) in &rows {
            let err = (hs.value - direct).abs() / direct.abs().max(1.0);
            errors.push(err);
            csv.push(vec![
                n.to_string(),
                t.to_string(),
                seed.to_string(),
                cell(hs.value),
                cell(*direct),
                cell(err),
                hs.evaluations.to_string(),
            ]);
        }
        let s = HsSize {
            e1: f.e1,
            e2: f.e2,
            eta_d: f.eta_d,
            max_relative_error: errors.iter().copied().fold(0.0, f64::max),
            median_relative_error: median(&errors),
            max_dropped_strip_bound: rows.iter().map(|(_, r)| r.1.dropped_strip_bound).fold(0.0, f64::max),
            head,
        };
        checks.push(Check::at_most("hs_max_relative_error", Some(n), s.max_relative_error, k.hs_tolerance));
        sizes.push(s);
    }
    Ok(DriverOutput {
        results: serde_json::json!({ "sizes": serde_json::to_value(sizes)? }),
        checks,
        csv,
    })
}
