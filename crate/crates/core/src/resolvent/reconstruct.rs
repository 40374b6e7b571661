//! Eigenvector overlaps `N u_alpha(i) conj(u_alpha(j))` recovered from integrals of
//! `G~_ij` over a window at the lower spectral edge.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::audit::{left_counting_edge, log_factor};
use super::green::{smoothed_count_unchecked, TildeGreenWeights};
use super::smoothing::CutoffQ;
use crate::error::{invalid, Error, Result};
use crate::quad::{adaptive_simpson_pieces, SimpsonOptions};
use crate::spectral::SpectralData;

/// Scales for the reconstruction: `eta = N^{-2/3 - eps}`, shift `(log N)^{c1} eta`,
/// window `-2 +- N^{-2/3} (log N)^{c2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionParams {
    pub eps: f64,
    pub c1_power: f64,
    pub c2_power: f64,
    /// Log power in `E_L = -2 - 2 (log N)^L N^{-2/3}`, used by the smoothed variant.
    pub edge_log_power: f64,
}

impl Default for ReconstructionParams {
    fn default() -> Self {
        Self {
            eps: 1.0,
            c1_power: 1.5,
            c2_power: 1.0,
            edge_log_power: 1.0,
        }
    }
}

impl ReconstructionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) || !self.c1_power.is_finite() || !self.c2_power.is_finite() || !self.edge_log_power.is_finite() {
            return Err(invalid(format!("reconstruction parameters out of range: {self:?}")));
        }
        Ok(())
    }

    pub fn eta(&self, n: usize) -> f64 {
        (n as f64).powf(-2.0 / 3.0 - self.eps)
    }

    /// `eta~ = N^{-2/3 - 6 eps}`, the smoothing scale of the count inside `q_alpha`.
    pub fn eta_tilde(&self, n: usize) -> f64 {
        (n as f64).powf(-2.0 / 3.0 - 6.0 * self.eps)
    }

    pub fn shift(&self, n: usize) -> f64 {
        log_factor(n, self.c1_power) * self.eta(n)
    }

    pub fn window(&self, n: usize) -> (f64, f64) {
        let half = (n as f64).powf(-2.0 / 3.0) * log_factor(n, self.c2_power);
        (-2.0 - half, -2.0 + half)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructedOverlap {
    pub value: Complex64,
    /// Both neighbouring gaps of `lambda_alpha` exceed twice the shift.
    pub quality: bool,
    /// `lambda_alpha` lies inside the integration window.
    pub in_window: bool,
    pub eta: f64,
    pub shift: f64,
    pub window: (f64, f64),
    pub error_estimate: f64,
}

fn check_index(sd: &SpectralData, alpha: usize, i: usize, j: usize) -> Result<()> {
    let n = sd.n();
    if alpha < 1 || alpha > n || i < 1 || i > n || j < 1 || j > n {
        return Err(Error::IndexOutOfRange(format!("alpha={alpha}, i={i}, j={j} with N={n}")));
    }
    Ok(())
}

fn gap_quality(lambda: &[f64], alpha: usize, shift: f64) -> bool {
    let l = lambda[alpha - 1];
    let below = if alpha >= 2 { l - lambda[alpha - 2] } else { f64::INFINITY };
    let above = if alpha < lambda.len() { lambda[alpha] - l } else { f64::INFINITY };
    below > 2.0 * shift && above > 2.0 * shift
}

/// Pieces of `[a, b]` split at the shifted eigenvalues `lambda_beta + shift`.
fn breakpoints(lambda: &[f64], shift: f64, a: f64, b: f64) -> Vec<f64> {
    let mut pts = vec![a];
    pts.extend(lambda.iter().map(|l| l + shift).filter(|&x| x > a && x < b));
    pts.push(b);
    pts
}

fn integrate(
    sd: &SpectralData,
    i: usize,
    j: usize,
    eta: f64,
    pieces: &[f64],
    weight: impl Fn(f64) -> f64,
) -> Result<(Complex64, f64)> {
    let n = sd.n() as f64;
    let tg = TildeGreenWeights::new(sd, i, j);
    let opts = SimpsonOptions::with_tol(1e-8 * n * PI / n).max_step(eta / 10.0);
    let r = adaptive_simpson_pieces(
        |e: f64| {
            let w = weight(e);
            if w == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                tg.eval(e, eta) * w
            }
        },
        pieces,
        opts,
    );
    if !r.converged {
        return Err(Error::Quadrature(format!("overlap integral over [{}, {}] did not converge", pieces[0], pieces[pieces.len() - 1])));
    }
    let mut v = r.value * (n / PI);
    if i == j {
        v.im = 0.0;
    }
    Ok((v, r.error_estimate * n / PI))
}

/// `(N/pi) int_I G~_ij(E + i eta) 1{lambda_{alpha-1} <= E - shift <= lambda_alpha} dE`
/// with `lambda_0 = -infinity`.
pub fn reconstruct_overlap_edge(
    sd: &SpectralData,
    alpha: usize,
    i: usize,
    j: usize,
    params: &ReconstructionParams,
) -> Result<ReconstructedOverlap> {
    params.validate()?;
    check_index(sd, alpha, i, j)?;
    let n = sd.n();
    let lambda = &sd.lambda;
    let (eta, shift, window) = (params.eta(n), params.shift(n), params.window(n));
    let lo = if alpha >= 2 { (lambda[alpha - 2] + shift).max(window.0) } else { window.0 };
    let hi = (lambda[alpha - 1] + shift).min(window.1);
    let (value, error_estimate) = if hi > lo {
        integrate(sd, i, j, eta, &breakpoints(lambda, shift, lo, hi), |_| 1.0)?
    } else {
        (Complex64::new(0.0, 0.0), 0.0)
    };
    let l = lambda[alpha - 1];
    Ok(ReconstructedOverlap {
        value,
        quality: gap_quality(lambda, alpha, shift),
        in_window: window.0 <= l && l <= window.1,
        eta,
        shift,
        window,
        error_estimate,
    })
}

/// Same integral with the sharp indicator replaced by `q_alpha` applied to the
/// smoothed count `tr(1_[E_L, E - shift] * theta_{eta~})(H)`.
pub fn reconstruct_overlap_smoothed(
    sd: &SpectralData,
    alpha: usize,
    i: usize,
    j: usize,
    params: &ReconstructionParams,
) -> Result<ReconstructedOverlap> {
    params.validate()?;
    check_index(sd, alpha, i, j)?;
    let n = sd.n();
    let lambda = &sd.lambda;
    let (eta, shift, window) = (params.eta(n), params.shift(n), params.window(n));
    let eta_t = params.eta_tilde(n);
    let el = left_counting_edge(n, params.edge_log_power);
    let q = CutoffQ::for_index(alpha);
    let count = |e: f64| {
        let x = e - shift;
        if x > el {
            smoothed_count_unchecked(lambda, el, x, eta_t)
        } else {
            0.0
        }
    };
    // q vanishes unless the count lies within 2/3 of alpha - 1; the count is
    // nondecreasing in E, so that set is an interval located by bisection.
    let centre = alpha as f64 - 1.0;
    let first_at_least = |level: f64| {
        let (mut a, mut b) = (window.0, window.1);
        if count(a) >= level {
            return a;
        }
        if count(b) < level {
            return b;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if count(m) >= level {
                b = m
            } else {
                a = m
            }
        }
        a
    };
    let lo = first_at_least(centre - 2.0 / 3.0);
    let hi = first_at_least(centre + 2.0 / 3.0).max(lo);
    let hi = if hi < window.1 { (hi + eta_t).min(window.1) } else { hi };
    let (value, error_estimate) = if hi > lo {
        integrate(sd, i, j, eta, &breakpoints(lambda, shift, lo, hi), |e| q.value(count(e)))?
    } else {
        (Complex64::new(0.0, 0.0), 0.0)
    };
    let l = lambda[alpha - 1];
    Ok(ReconstructedOverlap {
        value,
        quality: gap_quality(lambda, alpha, shift),
        in_window: window.0 <= l && l <= window.1,
        eta,
        shift,
        window,
        error_estimate,
    })
}

/// `(N/pi) sum_beta w_beta [atan((b - lambda_beta)/eta) - atan((a - lambda_beta)/eta)]`, the
/// closed form of the sharp-window integral over `[a, b]`.
pub fn overlap_window_closed_form(sd: &SpectralData, i: usize, j: usize, eta: f64, a: f64, b: f64) -> Complex64 {
    let tg = TildeGreenWeights::new(sd, i, j);
    let mut s = Complex64::new(0.0, 0.0);
    for (w, &l) in tg.weights.iter().zip(tg.lambda) {
        s += w * super::green::arctan_window(l, a, b, eta);
    }
    s * (sd.n() as f64 / PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample_matrix, EnsembleSpec, HermitianMatrix};
    use crate::spectral::{eigendecompose, eigenvector_overlap};

    fn toy() -> SpectralData {
        // eigenvalues -2 and 1 (well separated), rotated basis
        let (c, s) = (0.8f64, 0.6f64);
        let (l1, l2) = (-2.0, 1.0);
        let h = HermitianMatrix::from_real_fn(2, |i, j| {
            let u = [[c, -s], [s, c]];
            u[i][0] * l1 * u[j][0] + u[i][1] * l2 * u[j][1]
        });
        eigendecompose(&h).unwrap()
    }

    // log 2 < 1, so the toy needs negative log powers to make the shift much wider than eta
    const TOY: ReconstructionParams = ReconstructionParams {
        eps: 8.0,
        c1_power: -10.0,
        c2_power: -1.0,
        edge_log_power: 1.0,
    };

    #[test]
    fn two_by_two_toy_matches_direct_overlap() {
        let sd = toy();
        let p = TOY;
        for (i, j) in [(1, 1), (2, 2), (1, 2)] {
            let r = reconstruct_overlap_edge(&sd, 1, i, j, &p).unwrap();
            let direct = eigenvector_overlap(&sd, 1, i, j).unwrap();
            assert!((r.value - direct).norm() <= 0.02 * direct.norm(), "({i},{j}): {} vs {direct}", r.value);
            assert!(r.quality && r.in_window);
        }
    }

    #[test]
    fn quadrature_matches_closed_form() {
        let s = sample_matrix(&EnsembleSpec::gue(100).unwrap(), 8).unwrap();
        let sd = eigendecompose(&s.h).unwrap();
        let p = ReconstructionParams::default();
        let r = reconstruct_overlap_edge(&sd, 1, 3, 7, &p).unwrap();
        let hi = (sd.lambda[0] + r.shift).min(r.window.1);
        let exact = overlap_window_closed_form(&sd, 3, 7, r.eta, r.window.0, hi);
        assert!((r.value - exact).norm() < 1e-6, "{} vs {exact}", r.value);
    }

    #[test]
    fn diagonal_output_is_real() {
        let s = sample_matrix(&EnsembleSpec::gue(60).unwrap(), 2).unwrap();
        let sd = eigendecompose(&s.h).unwrap();
        let r = reconstruct_overlap_edge(&sd, 1, 4, 4, &ReconstructionParams::default()).unwrap();
        assert!(r.value.im.abs() < 1e-8);
        assert!(r.value.re >= 0.0);
    }

    #[test]
    fn smoothed_agrees_with_sharp_when_cutoff_is_one() {
        let sd = toy();
        let p = TOY;
        let sharp = reconstruct_overlap_edge(&sd, 1, 1, 2, &p).unwrap();
        let smooth = reconstruct_overlap_smoothed(&sd, 1, 1, 2, &p).unwrap();
        assert!((sharp.value - smooth.value).norm() < 1e-6, "{} vs {}", sharp.value, smooth.value);
    }

    #[test]
    fn wrong_index_gives_zero() {
        // with both eigenvalues far from the window, the count stays below 4/3, so q_3 vanishes
        let sd = eigendecompose(&HermitianMatrix::diagonal(&[-2.0, 1.0, 1.5])).unwrap();
        let r = reconstruct_overlap_smoothed(&sd, 3, 1, 1, &ReconstructionParams::default()).unwrap();
        assert_eq!(r.value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn gue_edge_reconstruction_is_accurate() {
        let p = ReconstructionParams::default();
        let mut errors = Vec::new();
        for seed in 0..20u64 {
            let s = sample_matrix(&EnsembleSpec::gue(200).unwrap(), seed).unwrap();
            let sd = eigendecompose(&s.h).unwrap();
            let r = reconstruct_overlap_edge(&sd, 1, 1, 1, &p).unwrap();
            if !r.quality {
                continue;
            }
            let d = eigenvector_overlap(&sd, 1, 1, 1).unwrap();
            errors.push((r.value - d).norm() / d.norm());
            let sm = reconstruct_overlap_smoothed(&sd, 1, 1, 1, &p).unwrap();
            assert!((sm.value - r.value).norm() <= 0.05 * r.value.norm());
        }
        errors.sort_by(f64::total_cmp);
        assert!(errors.len() >= 15);
        assert!(errors[errors.len() / 2] <= 0.05, "{errors:?}");
    }

    #[test]
    fn rejects_bad_input() {
        let sd = toy();
        assert!(reconstruct_overlap_edge(&sd, 0, 1, 1, &ReconstructionParams::default()).is_err());
        assert!(reconstruct_overlap_edge(&sd, 1, 3, 1, &ReconstructionParams::default()).is_err());
        let bad = ReconstructionParams { eps: 0.0, ..Default::default() };
        assert!(reconstruct_overlap_edge(&sd, 1, 1, 1, &bad).is_err());
    }
}
