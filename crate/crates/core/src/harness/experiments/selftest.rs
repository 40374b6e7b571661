//! Closed-form invariants that must hold to rounding error. Runs in well under a second.

use std::f64::consts::PI;

use faer::{c64, Mat};
use num_complex::Complex64;

use super::DriverOutput;
use crate::comparison::{telescope_decompose, CoupledEntries};
use crate::ensembles::{draw_entries, sample_matrix, EnsembleSpec, HermitianMatrix};
use crate::error::Result;
use crate::harness::report::{Check, CsvTable};
use crate::quad::{adaptive_simpson, SimpsonOptions};
use crate::resolvent::{resolvent_direct, resolvent_matrix, smoothed_count, smoothed_count_quadrature, theta_kernel};
use crate::semicircle::{classical_location, m_sc, n_sc};
use crate::spectral::eigendecompose;

fn max_diff(a: &Mat<c64>, b: &Mat<c64>) -> f64 {
    let mut m: f64 = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    m
}

fn m_sc_residual() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for a in 0..10 {
        for b in 0..10 {
            let e = -3.0 + 6.0 * a as f64 / 9.0;
            let eta = 10f64.powf(-6.0 + 7.0 * b as f64 / 9.0);
            let z = Complex64::new(e, eta);
            let m = m_sc(z)?;
            worst = worst.max((m + (z + m).inv()).norm());
        }
    }
    Ok(worst)
}

fn quantile_residual(n: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for a in 1..=n {
        worst = worst.max((n_sc(classical_location(a, n)?) - a as f64 / n as f64).abs());
    }
    Ok(worst)
}

/// `|int theta_eta - 1|` through `x = tan t`, which maps the real line onto a
/// bounded interval.
fn theta_normalization() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &eta in &[1e-3, 0.1, 1.0, 5.0] {
        theta_kernel(0.0, eta)?;
        let r = adaptive_simpson(
            |t: f64| {
                let x = t.tan();
                theta_kernel(x, eta).unwrap_or(f64::NAN) * (1.0 + x * x)
            },
            -PI / 2.0,
            PI / 2.0,
            SimpsonOptions::with_tol(1e-14).max_step(eta.min(0.1)),
        );
        worst = worst.max((r.value - 1.0).abs());
    }
    Ok(worst)
}

/// Spectral and LU resolvents, and `G_ij = G^{(k)}_ij + G_ik G_kj / G_kk` where
/// `G^{(k)}` is the resolvent with row and column `k` removed.
fn resolvent_identities() -> Result<(f64, f64)> {
    let n = 20;
    let spec = EnsembleSpec::gue(n)?;
    let z = Complex64::new(0.3, 0.05);
    let (mut spectral, mut minor) = (0.0_f64, 0.0_f64);
    for seed in 0..5u64 {
        let h = sample_matrix(&spec, seed)?.h;
        let g = resolvent_direct(&h, z)?;
        spectral = spectral.max(max_diff(&g, &resolvent_matrix(&eigendecompose(&h)?, z)?));
        let k = (seed as usize * 7) % n;
        let full = h.to_complex();
        let cut = HermitianMatrix::Complex(Mat::from_fn(n, n, |i, j| {
            if i == k || j == k {
                c64::new(0.0, 0.0)
            } else {
                full[(i, j)]
            }
        }));
        let gk = resolvent_direct(&cut, z)?;
        for i in (0..n).filter(|&i| i != k) {
            for j in (0..n).filter(|&j| j != k) {
                let rhs = gk[(i, j)] + g[(i, k)] * g[(k, j)] / g[(k, k)];
                minor = minor.max((g[(i, j)] - rhs).norm());
            }
        }
    }
    Ok((spectral, minor))
}

fn telescoping_residual() -> Result<f64> {
    let n = 6;
    let v = EnsembleSpec::gue(n)?;
    let w = EnsembleSpec::wigner(n, crate::ensembles::SymmetryClass::ComplexHermitian, crate::ensembles::EntryLaw::rademacher())?;
    let entries = CoupledEntries::new(draw_entries(&v, 1), draw_entries(&w, 2), v.profile.clone(), v.symmetry)?;
    let t = telescope_decompose(&entries, |h| Ok(h.trace()))?;
    Ok(t.residual.abs())
}

fn smoothed_count_agreement() -> Result<f64> {
    let lambda = [-1.7, -0.4, 0.0, 0.25, 1.3];
    let (e1, e2, eta) = (-1.0, 0.5, 0.02);
    let closed = smoothed_count(&lambda, e1, e2, eta)?;
    let quad = smoothed_count_quadrature(&lambda, e1, e2, eta, 1e-12)?;
    Ok((closed - quad).abs())
}

pub fn selftest_checks() -> Result<Vec<Check>> {
    let (spectral, minor) = resolvent_identities()?;
    Ok(vec![
        Check::at_most("m_sc_fixed_point_residual", None, m_sc_residual()?, 1e-12),
        Check::at_most("classical_location_inversion", Some(1000), quantile_residual(1000)?, 1e-12),
        Check::at_most("theta_normalization", None, theta_normalization()?, 1e-12),
        Check::at_most("spectral_vs_direct_resolvent", Some(20), spectral, 1e-9),
        Check::at_most("resolvent_minor_identity", Some(20), minor, 1e-9),
        Check::at_most("telescoping_trace_residual", Some(6), telescoping_residual()?, 1e-10),
        Check::at_most("smoothed_count_closed_form_vs_quadrature", Some(5), smoothed_count_agreement()?, 1e-8),
    ])
}

pub(super) fn run() -> Result<DriverOutput> {
    let checks = selftest_checks()?;
    let names: Vec<&str> = checks.iter().map(|c| c.name.as_str()).collect();
    Ok(DriverOutput {
        results: serde_json::json!({ "suite": names }),
        checks,
        csv: CsvTable::default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_quickly() {
        let t = std::time::Instant::now();
        let checks = selftest_checks().unwrap();
        for c in &checks {
            assert!(c.passed, "{c:?}");
        }
        assert!(t.elapsed().as_secs_f64() < 1.0);
    }
}
