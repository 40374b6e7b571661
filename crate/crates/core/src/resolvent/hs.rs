//! `tr f(H)` through the almost-analytic extension `f~(e + i s) = (f(e) + i s f'(e)) chi(s)`.
//!
//! Folding the lower half-plane onto the upper one leaves
//!
//! ```text
//! tr f(H) = -(N/pi) int_{s > 0} int [ s chi f'' Im m + chi' f Im m + s chi' f' Re m ] de ds
//! ```
//!
//! The strip `s < eta~_d` is dropped; since `s Im m(e + i s) <= 1` its contribution is
//! at most `(N/pi) eta~_d int |f''|`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::green::stieltjes_unchecked;
use super::smoothing::{smoothstep, SmoothedIndicator};
use crate::error::{invalid, Error, Result};
use crate::quad::{adaptive_simpson, adaptive_simpson_pieces, SimpsonOptions};

/// Ratio `eta~_d / eta_d` of the dropped strip.
pub const STRIP_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HsTrace {
    pub value: f64,
    /// Bound on the contribution of the dropped strip `0 < s < eta~_d`.
    pub dropped_strip_bound: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// `chi(s)` and `chi'(s)`: one on `[0, h/2]`, zero beyond `h`.
fn chi(s: f64, h: f64) -> (f64, f64) {
    let (v, d, _) = smoothstep(2.0 * (h - s) / h);
    (v, -2.0 * d / h)
}

pub fn hs_trace(lambda: &[f64], f: &SmoothedIndicator, chi_half_width: f64, quad_tol: f64) -> Result<HsTrace> {
    let (lo, hi) = f.support();
    if lo < -3.0 || hi > 3.0 {
        return Err(invalid(format!("indicator support [{lo}, {hi}] leaves [-3, 3]")));
    }
    if !(chi_half_width > 0.0) || !(quad_tol > 0.0) {
        return Err(invalid("hs_trace needs a positive cutoff width and tolerance"));
    }
    if lambda.is_empty() {
        return Err(invalid("empty spectrum"));
    }
    let n = lambda.len() as f64;
    let h = chi_half_width;
    let eta_d = f.eta_d;
    let strip = STRIP_FRACTION * eta_d;
    let scale = n / PI;
    // tolerance in units of the s-integrals, split between the three terms
    let tol = quad_tol / (3.0 * scale);
    let m = |e: f64, s: f64| stieltjes_unchecked(lambda, Complex64::new(e, s)) * n;
    let ramps = f.ramps();
    let mut evaluations = 0usize;
    let mut converged = true;
    let mut error = 0.0;

    // s chi f'' Im m over the ramps, in t = ln s so the integrand is smooth down to the strip
    let t0 = strip.ln();
    let t1 = h.ln();
    let t_range = t1 - t0;
    let term1 = {
        let outer = adaptive_simpson(
            |t: f64| {
                let s = t.exp();
                let (c, _) = chi(s, h);
                if c == 0.0 {
                    return 0.0;
                }
                let inner_tol = (tol / (4.0 * t_range * s * s)).min(1.0);
                let mut acc = 0.0;
                for &(a, b) in &ramps {
                    let r = adaptive_simpson(
                        |e: f64| f.eval(e).2 * m(e, s).im,
                        a,
                        b,
                        SimpsonOptions::with_tol(inner_tol / 2.0).max_step((eta_d / 4.0).min(s)),
                    );
                    evaluations += r.evaluations;
                    converged &= r.converged;
                    acc += r.value;
                }
                s * s * c * acc
            },
            t0,
            t1,
            SimpsonOptions::with_tol(tol / 2.0),
        );
        converged &= outer.converged;
        error += outer.error_estimate;
        outer.value / n
    };

    // chi' lives on [h/2, h], far from the real axis
    let pieces = [lo, ramps[0].1, ramps[1].0, hi];
    let mut inner_evals = 0usize;
    let mut inner_conv = true;
    let cross = adaptive_simpson(
        |s: f64| {
            let (_, dc) = chi(s, h);
            if dc == 0.0 {
                return 0.0;
            }
            let r = adaptive_simpson_pieces(
                |e: f64| {
                    let (fv, fd, _) = f.eval(e);
                    let mm = m(e, s);
                    fv * mm.im + s * fd * mm.re
                },
                &pieces,
                SimpsonOptions::with_tol(tol / (2.0 * h * dc.abs().max(1.0))).max_step(eta_d.max(s / 4.0)),
            );
            inner_evals += r.evaluations;
            inner_conv &= r.converged;
            dc * r.value
        },
        0.5 * h,
        h,
        SimpsonOptions::with_tol(tol),
    );
    converged &= cross.converged && inner_conv;
    evaluations += inner_evals + cross.evaluations;
    error += cross.error_estimate;

    if !converged {
        return Err(Error::Quadrature("Helffer-Sjostrand integral did not converge".into()));
    }
    let value = -scale * (term1 + cross.value / n);
    Ok(HsTrace {
        value,
        dropped_strip_bound: scale * strip * f.second_derivative_l1(),
        error_estimate: scale * error,
        evaluations,
    })
}

/// `sum_alpha f(lambda_alpha)`, the direct value [`hs_trace`] should reproduce.
pub fn direct_trace(lambda: &[f64], f: &SmoothedIndicator) -> f64 {
    lambda.iter().map(|&l| f.value(l)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample_matrix, EnsembleSpec};
    use crate::spectral::eigenvalues;

    #[test]
    fn chi_shape() {
        assert_eq!(chi(0.2, 1.0), (1.0, 0.0));
        assert_eq!(chi(1.0, 1.0).0, 0.0);
        let (v, d) = chi(0.75, 1.0);
        assert!((v - 0.5).abs() < 1e-15);
        let fd = (chi(0.75 + 1e-6, 1.0).0 - chi(0.75 - 1e-6, 1.0).0) / 2e-6;
        assert!((d - fd).abs() < 1e-6);
    }

    #[test]
    fn plateau_covering_spectrum_gives_n() {
        let lambda = [-1.2, -0.3, 0.0, 0.4, 1.9];
        let f = SmoothedIndicator::new(-2.5, 2.5, 0.1).unwrap();
        let r = hs_trace(&lambda, &f, 1.0, 1e-6).unwrap();
        assert!((r.value - 5.0).abs() < 1e-5, "{r:?}");
    }

    #[test]
    fn support_away_from_spectrum_gives_zero() {
        let lambda = [-1.0, -0.5, 0.5];
        let f = SmoothedIndicator::new(1.5, 2.0, 0.05).unwrap();
        let r = hs_trace(&lambda, &f, 1.0, 1e-6).unwrap();
        assert!(r.value.abs() < 1e-5, "{r:?}");
    }

    #[test]
    fn gue_smoothed_indicator_matches_spectral_sum() {
        let s = sample_matrix(&EnsembleSpec::gue(100).unwrap(), 3).unwrap();
        let l = eigenvalues(&s.h).unwrap();
        let f = SmoothedIndicator::new(-1.0, 0.0, 1e-3).unwrap();
        let r = hs_trace(&l, &f, 1.0, 1e-4).unwrap();
        let direct = direct_trace(&l, &f);
        assert!((r.value - direct).abs() <= 1e-3 * direct, "{} vs {direct}", r.value);
    }

    #[test]
    fn eigenvalue_inside_a_ramp() {
        let lambda = [-0.5, 0.2, 0.5004];
        let f = SmoothedIndicator::new(-0.6, 0.5, 1e-3).unwrap();
        let r = hs_trace(&lambda, &f, 1.0, 1e-6).unwrap();
        let direct = direct_trace(&lambda, &f);
        assert!(direct > 2.0 && direct < 3.0);
        assert!((r.value - direct).abs() < 1e-4, "{} vs {direct}", r.value);
    }

    #[test]
    fn rejects_bad_support() {
        let f = SmoothedIndicator::new(-3.0, 0.0, 0.1).unwrap();
        assert!(hs_trace(&[0.0], &f, 1.0, 1e-6).is_err());
    }
}
