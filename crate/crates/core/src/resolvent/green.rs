//! Resolvent entries, Stieltjes transform and control parameters.

use std::f64::consts::PI;

use faer::linalg::solvers::{DenseSolveCore, Solve};
use faer::{c64, Mat};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ensembles::{HermitianMatrix, SymmetryClass};
use crate::error::{invalid, Error, Result};
use crate::semicircle::SpectralParameter;
use crate::spectral::SpectralData;

fn check_offaxis(z: Complex64) -> Result<()> {
    if z.im == 0.0 || !z.im.is_finite() || !z.re.is_finite() {
        return Err(invalid(format!("resolvent needs Im z != 0, got {z}")));
    }
    Ok(())
}

fn check_entry(sd: &SpectralData, i: usize, j: usize) -> Result<()> {
    let n = sd.n();
    if i < 1 || i > n || j < 1 || j > n {
        return Err(Error::IndexOutOfRange(format!("entry ({i}, {j}) outside a {n} x {n} matrix")));
    }
    Ok(())
}

/// `G_ij(z) = ((H - z)^{-1})_ij` by spectral sum, 1-based indices.
pub fn green_entry(sd: &SpectralData, z: Complex64, i: usize, j: usize) -> Result<Complex64> {
    check_offaxis(z)?;
    check_entry(sd, i, j)?;
    let (ri, rj) = (sd.u.row(i - 1), sd.u.row(j - 1));
    let mut g = Complex64::new(0.0, 0.0);
    for (b, &l) in sd.lambda.iter().enumerate() {
        g += ri[b] * rj[b].conj() / (l - z);
    }
    Ok(g)
}

/// `m(z) = (1/N) tr G(z)`.
pub fn stieltjes(lambda: &[f64], z: Complex64) -> Result<Complex64> {
    check_offaxis(z)?;
    Ok(stieltjes_unchecked(lambda, z))
}

#[inline]
pub(crate) fn stieltjes_unchecked(lambda: &[f64], z: Complex64) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for &l in lambda {
        s += (l - z).inv();
    }
    s / lambda.len() as f64
}

/// `(G_ij(z) - G_ij(conj z)) / 2i = sum_b eta u_b(i) conj(u_b(j)) / ((E - lambda_b)^2 + eta^2)`.
pub fn tilde_green(sd: &SpectralData, z: Complex64, i: usize, j: usize) -> Result<Complex64> {
    if !(z.im > 0.0) {
        return Err(invalid(format!("tilde G needs Im z > 0, got {z}")));
    }
    check_entry(sd, i, j)?;
    Ok(TildeGreenWeights::new(sd, i, j).eval(z.re, z.im))
}

/// Precomputed `u_b(i) conj(u_b(j))` for repeated evaluation of `G~_ij` along a line.
#[derive(Debug, Clone)]
pub struct TildeGreenWeights<'a> {
    pub lambda: &'a [f64],
    pub weights: Vec<Complex64>,
    pub diagonal: bool,
}

impl<'a> TildeGreenWeights<'a> {
    pub fn new(sd: &'a SpectralData, i: usize, j: usize) -> Self {
        let (ri, rj) = (sd.u.row(i - 1), sd.u.row(j - 1));
        let weights = (0..sd.n()).map(|b| ri[b] * rj[b].conj()).collect();
        Self {
            lambda: &sd.lambda,
            weights,
            diagonal: i == j,
        }
    }

    #[inline]
    pub fn eval(&self, e: f64, eta: f64) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for (w, &l) in self.weights.iter().zip(self.lambda) {
            let d = e - l;
            s += w * (eta / (d * d + eta * eta));
        }
        if self.diagonal {
            Complex64::new(s.re, 0.0)
        } else {
            s
        }
    }
}

/// The full resolvent `U diag(1/(lambda - z)) U*`.
pub fn resolvent_matrix(sd: &SpectralData, z: Complex64) -> Result<Mat<c64>> {
    check_offaxis(z)?;
    let n = sd.n();
    let d: Vec<Complex64> = sd.lambda.iter().map(|&l| (l - z).inv()).collect();
    if sd.symmetry == SymmetryClass::RealSymmetric {
        // U is real: G = U diag(Re d) U^T + i U diag(Im d) U^T with two real products
        let ur = Mat::<f64>::from_fn(n, n, |i, j| sd.u[(i, j)].re);
        let a = Mat::<f64>::from_fn(n, n, |i, j| ur[(i, j)] * d[j].re);
        let b = Mat::<f64>::from_fn(n, n, |i, j| ur[(i, j)] * d[j].im);
        let re = &a * ur.transpose();
        let im = &b * ur.transpose();
        crate::simd::clear_upper_state();
        return Ok(Mat::from_fn(n, n, |i, j| c64::new(re[(i, j)], im[(i, j)])));
    }
    let w = Mat::<c64>::from_fn(n, n, |i, j| sd.u[(i, j)] * d[j]);
    let g = &w * sd.u.adjoint();
    crate::simd::clear_upper_state();
    Ok(g)
}

/// `(H - z)^{-1}` by LU factorization, independent of any eigendecomposition.
pub fn resolvent_direct(h: &HermitianMatrix, z: Complex64) -> Result<Mat<c64>> {
    check_offaxis(z)?;
    let n = h.n();
    let a = Mat::<c64>::from_fn(n, n, |i, j| {
        let v = h.get(i, j);
        if i == j {
            v - z
        } else {
            v
        }
    });
    let g = a.partial_piv_lu().inverse();
    crate::simd::clear_upper_state();
    Ok(g)
}

/// Solves `(H - z) x = e_j` for 1-based `j`.
pub fn resolvent_column_direct(h: &HermitianMatrix, z: Complex64, j: usize) -> Result<Vec<Complex64>> {
    check_offaxis(z)?;
    let n = h.n();
    let a = Mat::<c64>::from_fn(n, n, |r, c| {
        let v = h.get(r, c);
        if r == c {
            v - z
        } else {
            v
        }
    });
    let rhs = Mat::<c64>::from_fn(n, 1, |r, _| if r == j - 1 { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) });
    let x = a.partial_piv_lu().solve(&rhs);
    crate::simd::clear_upper_state();
    Ok((0..n).map(|r| x[(r, 0)]).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlParams {
    /// `max_i |G_ii - m_sc|`.
    pub lambda_d: f64,
    /// `max_{i != j} |G_ij|`.
    pub lambda_o: f64,
    /// `|m - m_sc|`.
    pub lambda: f64,
    pub at: SpectralParameter,
}

pub fn control_params(sd: &SpectralData, z: Complex64) -> Result<ControlParams> {
    let at = SpectralParameter::new(z.re, z.im)?;
    let g = resolvent_matrix(sd, z)?;
    Ok(control_params_from(&g, z, at))
}

pub(crate) fn control_params_from(g: &Mat<c64>, z: Complex64, at: SpectralParameter) -> ControlParams {
    let n = g.nrows();
    let msc = crate::semicircle::m_sc_unchecked(z);
    let mut lambda_d: f64 = 0.0;
    let mut lambda_o: f64 = 0.0;
    let mut trace = Complex64::new(0.0, 0.0);
    for j in 0..n {
        for i in 0..n {
            let v = g[(i, j)];
            if i == j {
                trace += v;
                lambda_d = lambda_d.max((v - msc).norm());
            } else {
                lambda_o = lambda_o.max(v.norm_sqr());
            }
        }
    }
    ControlParams {
        lambda_d,
        lambda_o: lambda_o.sqrt(),
        lambda: (trace / n as f64 - msc).norm(),
        at,
    }
}

/// Approximate delta function `eta / (pi (x^2 + eta^2))`.
pub fn theta_kernel(x: f64, eta: f64) -> Result<f64> {
    if !(eta > 0.0) {
        return Err(invalid(format!("theta kernel needs eta > 0, got {eta}")));
    }
    Ok(eta / (PI * (x * x + eta * eta)))
}

/// `tr (1_[e1, e2] * theta_eta)(H)` in arctan closed form.
pub fn smoothed_count(lambda: &[f64], e1: f64, e2: f64, eta: f64) -> Result<f64> {
    if !(e1 <= e2) {
        return Err(invalid(format!("smoothed count needs E1 <= E2, got [{e1}, {e2}]")));
    }
    if !(eta > 0.0) {
        return Err(invalid(format!("smoothed count needs eta > 0, got {eta}")));
    }
    Ok(smoothed_count_unchecked(lambda, e1, e2, eta))
}

#[inline]
pub(crate) fn smoothed_count_unchecked(lambda: &[f64], e1: f64, e2: f64, eta: f64) -> f64 {
    let mut s = 0.0;
    for &l in lambda {
        s += arctan_window(l, e1, e2, eta);
    }
    s / PI
}

/// `atan((e2 - l)/eta) - atan((e1 - l)/eta)`, computed as a single arctangent of the
/// difference when both arguments share a sign to avoid cancellation far from the
/// window.
#[inline]
pub(crate) fn arctan_window(l: f64, e1: f64, e2: f64, eta: f64) -> f64 {
    let a = (e2 - l) / eta;
    let b = (e1 - l) / eta;
    if a * b > 0.0 {
        // atan a - atan b = atan((a - b) / (1 + a b)) when a b > -1
        ((a - b) / (1.0 + a * b)).atan()
    } else {
        a.atan() - b.atan()
    }
}

/// `(N/pi) int_{e1}^{e2} Im m(y + i eta) dy` by adaptive quadrature; the
/// cross-check for [`smoothed_count`].
pub fn smoothed_count_quadrature(lambda: &[f64], e1: f64, e2: f64, eta: f64, tol: f64) -> Result<f64> {
    if !(e1 <= e2) || !(eta > 0.0) {
        return Err(invalid("smoothed count needs E1 <= E2 and eta > 0"));
    }
    let n = lambda.len() as f64;
    let opts = crate::quad::SimpsonOptions::with_tol(tol * PI / n).max_step(eta / 2.0);
    let r = crate::quad::adaptive_simpson(
        |y: f64| stieltjes_unchecked(lambda, Complex64::new(y, eta)).im,
        e1,
        e2,
        opts,
    );
    if !r.converged {
        return Err(Error::Quadrature(format!("Im m integral over [{e1}, {e2}] did not converge")));
    }
    Ok(n / PI * r.value)
}
