//! Dense eigendecomposition and direct spectral statistics.

use std::io::Write;

use faer::{c64, Mat, Side};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ensembles::{HermitianMatrix, SymmetryClass};
use crate::error::{invalid, Error, Result};
use crate::semicircle::{classical_location, ClassicalLocations};

/// Residual tolerance relative to `||H||`.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Adjacent gaps below this make individual eigenvectors unreliable.
pub const DEGENERATE_GAP: f64 = 1e-10;

/// Ordered eigenvalues and phase-normalized eigenvectors of one matrix.
#[derive(Debug, Clone)]
pub struct SpectralData {
    /// Nondecreasing eigenvalues.
    pub lambda: Vec<f64>,
    /// Column `alpha - 1` is the eigenvector of `lambda[alpha - 1]`, with its
    /// largest-modulus component real and positive.
    pub u: Mat<c64>,
    pub symmetry: SymmetryClass,
    /// `max_alpha ||H u_alpha - lambda_alpha u_alpha||`.
    pub residual: f64,
    /// Operator norm `max |lambda|`.
    pub norm: f64,
}

impl SpectralData {
    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    /// Component `u_alpha(i)`, both indices 1-based.
    #[inline]
    pub fn component(&self, alpha: usize, i: usize) -> Complex64 {
        self.u[(i - 1, alpha - 1)]
    }

    /// Whether eigenvector `alpha` is isolated from its neighbours by more than
    /// [`DEGENERATE_GAP`].
    pub fn is_isolated(&self, alpha: usize) -> bool {
        let k = alpha - 1;
        let left = k == 0 || self.lambda[k] - self.lambda[k - 1] >= DEGENERATE_GAP;
        let right = k + 1 == self.n() || self.lambda[k + 1] - self.lambda[k] >= DEGENERATE_GAP;
        left && right
    }

    fn check_index(&self, what: &str, k: usize) -> Result<()> {
        if k < 1 || k > self.n() {
            return Err(Error::IndexOutOfRange(format!("{what} = {k} must lie in [1, {}]", self.n())));
        }
        Ok(())
    }
}

fn fix_phases(u: &mut Mat<c64>) {
    for col in 0..u.ncols() {
        let mut best = 0;
        let mut best_abs = -1.0;
        for row in 0..u.nrows() {
            let a = u[(row, col)].norm();
            if a > best_abs {
                best_abs = a;
                best = row;
            }
        }
        if best_abs <= 0.0 {
            continue;
        }
        let c = u[(best, col)];
        let phase = c.conj() / c.norm();
        for row in 0..u.nrows() {
            u[(row, col)] *= phase;
        }
        u[(best, col)] = c64::new(u[(best, col)].norm(), 0.0);
    }
}

fn residual_of(h: &Mat<c64>, u: &Mat<c64>, lambda: &[f64]) -> f64 {
    let hu = h * u;
    crate::simd::clear_upper_state();
    let mut worst: f64 = 0.0;
    for (col, &l) in lambda.iter().enumerate() {
        let mut s = 0.0;
        for row in 0..u.nrows() {
            s += (hu[(row, col)] - u[(row, col)] * l).norm_sqr();
        }
        worst = worst.max(s.sqrt());
    }
    worst
}

fn residual_real(h: &Mat<f64>, u: &Mat<f64>, lambda: &[f64]) -> f64 {
    let hu = h * u;
    crate::simd::clear_upper_state();
    let mut worst: f64 = 0.0;
    for (col, &l) in lambda.iter().enumerate() {
        let mut s = 0.0;
        for row in 0..u.nrows() {
            let d = hu[(row, col)] - u[(row, col)] * l;
            s += d * d;
        }
        worst = worst.max(s.sqrt());
    }
    worst
}

fn ascending(lambda: &[f64]) -> bool {
    lambda.windows(2).all(|w| w[0] <= w[1])
}

/// Full eigendecomposition with residual verification.
///
/// Fails if the residual exceeds `1e-8 ||H||`; such a trial should be excluded
/// rather than retried.
pub fn eigendecompose(h: &HermitianMatrix) -> Result<SpectralData> {
    let n = h.n();
    if n == 0 {
        return Err(invalid("cannot decompose an empty matrix"));
    }
    if h.max_abs().is_nan() {
        return Err(Error::Eigen("matrix contains NaN".into()));
    }
    let (lambda, mut u, residual) = match h {
        HermitianMatrix::Real(m) => {
            let evd = m
                .self_adjoint_eigen(Side::Lower)
                .map_err(|e| Error::Eigen(format!("{e:?}")));
            crate::simd::clear_upper_state();
            let evd = evd?;
            let lambda: Vec<f64> = evd.S().column_vector().iter().copied().collect();
            let ur = evd.U().to_owned();
            let residual = residual_real(m, &ur, &lambda);
            let u = Mat::from_fn(n, n, |i, j| c64::new(ur[(i, j)], 0.0));
            (lambda, u, residual)
        }
        HermitianMatrix::Complex(m) => {
            let evd = m
                .self_adjoint_eigen(Side::Lower)
                .map_err(|e| Error::Eigen(format!("{e:?}")));
            crate::simd::clear_upper_state();
            let evd = evd?;
            let lambda: Vec<f64> = evd.S().column_vector().iter().map(|z| z.re).collect();
            let u = evd.U().to_owned();
            let residual = residual_of(m, &u, &lambda);
            (lambda, u, residual)
        }
    };
    let (lambda, u_sorted) = if ascending(&lambda) {
        (lambda, None)
    } else {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| lambda[a].total_cmp(&lambda[b]));
        let sorted = order.iter().map(|&k| lambda[k]).collect();
        (sorted, Some(Mat::from_fn(n, n, |i, j| u[(i, order[j])])))
    };
    if let Some(s) = u_sorted {
        u = s;
    }
    fix_phases(&mut u);
    let norm = lambda.iter().fold(0.0_f64, |m, l| m.max(l.abs()));
    if !(residual <= RESIDUAL_TOL * norm.max(f64::MIN_POSITIVE)) && residual > 0.0 {
        return Err(Error::Eigen(format!(
            "eigen residual {residual:e} exceeds {RESIDUAL_TOL:e} * ||H|| = {:e}",
            RESIDUAL_TOL * norm
        )));
    }
    Ok(SpectralData {
        lambda,
        u,
        symmetry: h.symmetry(),
        residual,
        norm,
    })
}

/// Eigenvalues only, checked against the trace identity.
pub fn eigenvalues(h: &HermitianMatrix) -> Result<Vec<f64>> {
    let lambda = match h {
        HermitianMatrix::Real(m) => m.self_adjoint_eigenvalues(Side::Lower),
        HermitianMatrix::Complex(m) => m.self_adjoint_eigenvalues(Side::Lower),
    }
    .map_err(|e| Error::Eigen(format!("{e:?}")));
    crate::simd::clear_upper_state();
    let mut lambda = lambda?;
    if !ascending(&lambda) {
        lambda.sort_by(f64::total_cmp);
    }
    let n = lambda.len() as f64;
    let tr = h.trace();
    let sum: f64 = lambda.iter().sum();
    if !((sum - tr).abs() <= 1e-8 * n * h.max_abs().max(f64::MIN_POSITIVE)) {
        return Err(Error::Eigen(format!("trace identity violated: sum {sum} vs trace {tr}")));
    }
    Ok(lambda)
}

/// `#{alpha : e1 <= lambda_alpha <= e2}` on a sorted spectrum.
pub fn count_eigenvalues(lambda: &[f64], e1: f64, e2: f64) -> Result<usize> {
    if !(e1 <= e2) {
        return Err(invalid(format!("count window needs E1 <= E2, got [{e1}, {e2}]")));
    }
    Ok(count_sorted(lambda, e1, e2))
}

#[inline]
pub(crate) fn count_sorted(lambda: &[f64], e1: f64, e2: f64) -> usize {
    let lo = lambda.partition_point(|&l| l < e1);
    let hi = lambda.partition_point(|&l| l <= e2);
    hi.saturating_sub(lo)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RigidityProfile {
    pub deviation: Vec<f64>,
    /// `min(alpha, N - alpha + 1)^{-1/3} N^{-2/3}`.
    pub normalizer: Vec<f64>,
    pub ratio: Vec<f64>,
    pub worst_ratio: f64,
    pub worst_alpha: usize,
    pub log_power: f64,
    /// `(log N)^log_power`.
    pub threshold: f64,
    pub within: bool,
}

pub fn rigidity_profile(lambda: &[f64], log_power: f64) -> Result<RigidityProfile> {
    let n = lambda.len();
    let gamma = ClassicalLocations::new(n)?;
    let nf = n as f64;
    let mut deviation = Vec::with_capacity(n);
    let mut normalizer = Vec::with_capacity(n);
    let mut ratio = Vec::with_capacity(n);
    let (mut worst_ratio, mut worst_alpha) = (0.0, 1);
    for a in 1..=n {
        let d = (lambda[a - 1] - gamma.get(a)).abs();
        let m = a.min(n - a + 1) as f64;
        let norm = m.powf(-1.0 / 3.0) * nf.powf(-2.0 / 3.0);
        let r = d / norm;
        if r > worst_ratio {
            worst_ratio = r;
            worst_alpha = a;
        }
        deviation.push(d);
        normalizer.push(norm);
        ratio.push(r);
    }
    let threshold = nf.ln().powf(log_power);
    Ok(RigidityProfile {
        deviation,
        normalizer,
        ratio,
        worst_ratio,
        worst_alpha,
        log_power,
        threshold,
        within: worst_ratio <= threshold,
    })
}

/// `N max_{alpha, i} |u_alpha(i)|^2`.
pub fn delocalization_stat(sd: &SpectralData) -> f64 {
    let n = sd.n();
    let mut m: f64 = 0.0;
    for j in 0..n {
        for i in 0..n {
            m = m.max(sd.u[(i, j)].norm_sqr());
        }
    }
    n as f64 * m
}

/// `N u_alpha(i) conj(u_alpha(j))`, the coefficient of `1/(lambda_alpha - z)` in the
/// resolvent entry `G_ij(z)`. Independent of the eigenvector's phase; real and
/// nonnegative for `i = j`.
pub fn eigenvector_overlap(sd: &SpectralData, alpha: usize, i: usize, j: usize) -> Result<Complex64> {
    sd.check_index("alpha", alpha)?;
    sd.check_index("i", i)?;
    sd.check_index("j", j)?;
    let v = sd.component(alpha, i) * sd.component(alpha, j).conj() * sd.n() as f64;
    Ok(if i == j { Complex64::new(v.re, 0.0) } else { v })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Edge,
    Bulk,
}

impl Region {
    /// Fluctuation scale exponent: `N^{2/3}` at the edge, `N` in the bulk.
    pub fn scale(&self, n: usize) -> f64 {
        match self {
            Region::Edge => (n as f64).powf(2.0 / 3.0),
            Region::Bulk => n as f64,
        }
    }
}

/// `N^{2/3} (lambda_beta - gamma_beta)` at the edge, `N (lambda_beta - gamma_beta)`
/// in the bulk.
pub fn scaled_eigenvalue(lambda: &[f64], beta: usize, region: Region) -> Result<f64> {
    let n = lambda.len();
    if beta < 1 || beta > n {
        return Err(Error::IndexOutOfRange(format!("beta = {beta} must lie in [1, {n}]")));
    }
    Ok(region.scale(n) * (lambda[beta - 1] - classical_location(beta, n)?))
}

/// Smallest spacing between consecutive eigenvalues inside `[e1, e2]`;
/// infinity if fewer than two lie there.
pub fn min_gap(lambda: &[f64], e1: f64, e2: f64) -> Result<f64> {
    if !(e1 <= e2) {
        return Err(invalid(format!("gap window needs E1 <= E2, got [{e1}, {e2}]")));
    }
    let lo = lambda.partition_point(|&l| l < e1);
    let hi = lambda.partition_point(|&l| l <= e2);
    Ok(lambda[lo..hi]
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min))
}

/// CSV with columns `alpha,lambda,gamma,deviation`.
pub fn write_spectrum_csv<W: Write>(lambda: &[f64], out: W) -> Result<()> {
    let gamma = ClassicalLocations::new(lambda.len())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["alpha", "lambda", "gamma", "deviation"])?;
    for (k, &l) in lambda.iter().enumerate() {
        let g = gamma.get(k + 1);
        w.write_record([(k + 1).to_string(), l.to_string(), g.to_string(), (l - g).to_string()])?;
    }
    w.flush()?;
    Ok(())
}
