//! Empirical audits of the local semicircle law and of the smoothed-counting
//! estimates near the lower spectral edge.
//!
//! Thresholds that carry unspecified constants in the asymptotic statements use
//! `(log N)^p` with a configurable power `p`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::green::{control_params, smoothed_count_unchecked};
use crate::error::{invalid, Result};
use crate::semicircle::{m_sc, SpectralParameter};
use crate::spectral::{count_sorted, SpectralData};

/// `(log N)^power`, the stand-in for the log-power factors.
pub fn log_factor(n: usize, power: f64) -> f64 {
    (n as f64).ln().powf(power)
}

/// `E_L = -2 - 2 (log N)^L N^{-2/3}`, the left end of the counting intervals.
pub fn left_counting_edge(n: usize, edge_log_power: f64) -> f64 {
    -2.0 - 2.0 * log_factor(n, edge_log_power) * (n as f64).powf(-2.0 / 3.0)
}

/// Energies with `|E + 2| N^{2/3} <= 1.5 (log N)^L`.
pub fn edge_window(n: usize, edge_log_power: f64) -> (f64, f64) {
    let half = 1.5 * log_factor(n, edge_log_power) * (n as f64).powf(-2.0 / 3.0);
    (-2.0 - half, -2.0 + half)
}

/// `k` equally spaced energies covering [`edge_window`].
pub fn edge_grid(n: usize, edge_log_power: f64, k: usize) -> Vec<f64> {
    let (lo, hi) = edge_window(n, edge_log_power);
    if k == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..k).map(|t| lo + (hi - lo) * t as f64 / (k - 1) as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditGrid {
    pub points: Vec<SpectralParameter>,
}

impl AuditGrid {
    pub fn new(points: Vec<SpectralParameter>) -> Result<Self> {
        if points.is_empty() {
            return Err(invalid("audit grid is empty"));
        }
        for p in &points {
            if p.e.abs() > 5.0 || !(p.eta > 0.0 && p.eta <= 10.0) {
                return Err(invalid(format!("audit point E={}, eta={} outside |E| <= 5, 0 < eta <= 10", p.e, p.eta)));
            }
        }
        Ok(Self { points })
    }

    /// Edge, bulk and outside energies crossed with `eta in {1, 10/N, 1/N, 0.1/N}`;
    /// the last two probe the regime below the microscopic scale.
    pub fn standard(n: usize) -> Self {
        let nf = n as f64;
        let mut points = Vec::new();
        for &e in &[-2.0, -1.0, 0.0, 1.5, 2.5] {
            for &eta in &[1.0, 10.0 / nf, 1.0 / nf, 0.1 / nf] {
                points.push(SpectralParameter { e, eta });
            }
        }
        Self { points }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditPoint {
    pub e: f64,
    pub eta: f64,
    pub lambda: f64,
    pub lambda_d: f64,
    pub lambda_o: f64,
    /// `Lambda N eta / (log N)^p`.
    pub average_ratio: f64,
    /// `(Lambda_d + Lambda_o) / ((log N)^p (sqrt(Im m_sc / (N eta)) + 1/(N eta)))`.
    pub entrywise_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalLawAudit {
    pub n: usize,
    pub log_power: f64,
    pub points: Vec<AuditPoint>,
    pub max_average_ratio: f64,
    pub max_entrywise_ratio: f64,
    /// `(||H|| - 2) / (N^{-2/3} (log N)^p)`.
    pub norm_ratio: f64,
    pub average_ok: bool,
    pub entrywise_ok: bool,
    pub norm_ok: bool,
}

impl LocalLawAudit {
    pub fn passes(&self) -> bool {
        self.average_ok && self.entrywise_ok && self.norm_ok
    }
}

pub fn local_law_audit(sd: &SpectralData, grid: &AuditGrid, log_power: f64) -> Result<LocalLawAudit> {
    let n = sd.n();
    let nf = n as f64;
    let lf = log_factor(n, log_power);
    let points = grid
        .points
        .par_iter()
        .map(|p| {
            let z = p.z();
            let cp = control_params(sd, z)?;
            let msc = m_sc(z)?;
            let neta = nf * p.eta;
            let bound = lf * ((msc.im / neta).sqrt() + 1.0 / neta);
            Ok(AuditPoint {
                e: p.e,
                eta: p.eta,
                lambda: cp.lambda,
                lambda_d: cp.lambda_d,
                lambda_o: cp.lambda_o,
                average_ratio: cp.lambda * neta / lf,
                entrywise_ratio: (cp.lambda_d + cp.lambda_o) / bound,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_average_ratio = points.iter().map(|p| p.average_ratio).fold(0.0, f64::max);
    let max_entrywise_ratio = points.iter().map(|p| p.entrywise_ratio).fold(0.0, f64::max);
    let norm_ratio = (sd.norm - 2.0) / (nf.powf(-2.0 / 3.0) * lf);
    Ok(LocalLawAudit {
        n,
        log_power,
        points,
        max_average_ratio,
        max_entrywise_ratio,
        norm_ratio,
        average_ok: max_average_ratio <= 1.0,
        entrywise_ok: max_entrywise_ratio <= 1.0,
        norm_ok: norm_ratio <= 1.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpSmoothGap {
    pub e: f64,
    pub eps: f64,
    pub ell1: f64,
    pub eta: f64,
    /// `tr chi_E(H)`, the number of eigenvalues in `[E_L, E]`.
    pub sharp: f64,
    /// `tr (chi_E * theta_eta)(H)`.
    pub smooth: f64,
    pub lhs: f64,
    pub local_count: usize,
    pub rhs: f64,
    pub holds: bool,
    pub in_edge_window: bool,
}

/// Compares the sharp count on `[E_L, E]` with its `theta_eta` smoothing, using
/// `ell_1 = N^{-2/3 - 3 eps}` and `eta = N^{-2/3 - 9 eps}`.
pub fn sharp_vs_smooth_gap(lambda: &[f64], e: f64, eps: f64, c: f64, edge_log_power: f64) -> Result<SharpSmoothGap> {
    if !(eps > 0.0) {
        return Err(invalid(format!("eps must be positive, got {eps}")));
    }
    let n = lambda.len();
    let nf = n as f64;
    let ell1 = nf.powf(-2.0 / 3.0 - 3.0 * eps);
    let eta = nf.powf(-2.0 / 3.0 - 9.0 * eps);
    let el = left_counting_edge(n, edge_log_power);
    let (lo, hi) = edge_window(n, edge_log_power);
    let sharp = if e >= el { count_sorted(lambda, el, e) as f64 } else { 0.0 };
    let smooth = if e >= el { smoothed_count_unchecked(lambda, el, e, eta) } else { 0.0 };
    let lhs = (sharp - smooth).abs();
    let local_count = count_sorted(lambda, e - ell1, e + ell1);
    let rhs = c * (nf.powf(-2.0 * eps) + local_count as f64);
    Ok(SharpSmoothGap {
        e,
        eps,
        ell1,
        eta,
        sharp,
        smooth,
        lhs,
        local_count,
        rhs,
        holds: lhs <= rhs,
        in_edge_window: lo <= e && e <= hi,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    pub e: f64,
    pub ell: f64,
    pub eta: f64,
    pub lower: f64,
    pub count: usize,
    pub upper: f64,
    pub holds: bool,
}

/// Checks `tr(chi_{E-l} * theta)(H) - N^{-eps} <= #{lambda <= E} <= tr(chi_{E+l} * theta)(H) + N^{-eps}`
/// with `l = N^{-2/3 - eps} / 2` and `eta = N^{-2/3 - 9 eps}`.
pub fn counting_sandwich(lambda: &[f64], e: f64, eps: f64, edge_log_power: f64) -> Result<Sandwich> {
    if !(eps > 0.0) {
        return Err(invalid(format!("eps must be positive, got {eps}")));
    }
    let n = lambda.len();
    let nf = n as f64;
    let ell = 0.5 * nf.powf(-2.0 / 3.0 - eps);
    let eta = nf.powf(-2.0 / 3.0 - 9.0 * eps);
    let el = left_counting_edge(n, edge_log_power);
    let slack = nf.powf(-eps);
    let smooth = |x: f64| if x >= el { smoothed_count_unchecked(lambda, el, x, eta) } else { 0.0 };
    let lower = smooth(e - ell) - slack;
    let upper = smooth(e + ell) + slack;
    let count = lambda.partition_point(|&l| l <= e);
    Ok(Sandwich {
        e,
        ell,
        eta,
        lower,
        count,
        upper,
        holds: lower <= count as f64 && count as f64 <= upper,
    })
}
