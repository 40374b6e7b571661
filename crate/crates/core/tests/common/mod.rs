//! Oracles shared by the integration tests. Everything here is computed by a route
//! independent of the library path it checks.
#![allow(dead_code)]

use faer::{c64, Mat};
use rand::Rng;
use rand_distr::StandardNormal;
use wignerlab_core::ensembles::{EnsembleSpec, HermitianMatrix, VarianceProfile};
use wignerlab_core::harness::{stream_rng, StreamTag};
use wignerlab_core::resolvent::{resolvent_direct, resolvent_matrix, tilde_green};
use wignerlab_core::spectral::{eigendecompose, SpectralData};
use wignerlab_core::Complex64;

/// Resolvent of `H` with row and column `k` deleted, by LU on the `(N-1) x (N-1)`
/// matrix. The result is indexed by the original labels; row and column `k` are zero.
pub fn minor_resolvent(h: &HermitianMatrix, k: usize, z: Complex64) -> Mat<c64> {
    let n = h.n();
    let keep: Vec<usize> = (0..n).filter(|&i| i != k).collect();
    let sub = Mat::from_fn(n - 1, n - 1, |a, b| {
        let v = h.get(keep[a], keep[b]);
        c64::new(v.re, v.im)
    });
    let g = resolvent_direct(&HermitianMatrix::Complex(sub), z).expect("minor resolvent");
    let mut out = Mat::zeros(n, n);
    for (a, &i) in keep.iter().enumerate() {
        for (b, &j) in keep.iter().enumerate() {
            out[(i, j)] = g[(a, b)];
        }
    }
    out
}

fn c(v: c64) -> Complex64 {
    Complex64::new(v.re, v.im)
}

/// `max |S_ij - S^{(k)}_ij - S_ik S_kj / S_kk|` over `k` and `i, j != k`, with the
/// full resolvent taken from the spectral decomposition.
pub fn minor_identity_residual(h: &HermitianMatrix, z: Complex64) -> f64 {
    let n = h.n();
    let g = resolvent_matrix(&eigendecompose(h).unwrap(), z).unwrap();
    let mut worst: f64 = 0.0;
    for k in 0..n {
        let gk = minor_resolvent(h, k, z);
        for i in (0..n).filter(|&i| i != k) {
            for j in (0..n).filter(|&j| j != k) {
                let rhs = c(gk[(i, j)]) + c(g[(i, k)]) * c(g[(k, j)]) / c(g[(k, k)]);
                worst = worst.max((c(g[(i, j)]) - rhs).norm());
            }
        }
    }
    worst
}

/// Both row expansions `S_ij = -S_ii sum_k h_ik S^{(i)}_kj` and
/// `S_ij = -S_jj sum_k S^{(j)}_ik h_kj` for `i != j`.
pub fn row_expansion_residual(h: &HermitianMatrix, z: Complex64) -> f64 {
    let n = h.n();
    let g = resolvent_matrix(&eigendecompose(h).unwrap(), z).unwrap();
    let minors: Vec<Mat<c64>> = (0..n).map(|k| minor_resolvent(h, k, z)).collect();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            let mut left = Complex64::new(0.0, 0.0);
            for k in (0..n).filter(|&k| k != i) {
                left += h.get(i, k) * c(minors[i][(k, j)]);
            }
            let mut right = Complex64::new(0.0, 0.0);
            for k in (0..n).filter(|&k| k != j) {
                right += c(minors[j][(i, k)]) * h.get(k, j);
            }
            let gij = c(g[(i, j)]);
            worst = worst.max((gij + c(g[(i, i)]) * left).norm());
            worst = worst.max((gij + c(g[(j, j)]) * right).norm());
        }
    }
    worst
}

/// `max |G~_ij(z) - Im z sum_k G_ik conj(G_jk)|` with `G` from LU.
pub fn tilde_sum_residual(h: &HermitianMatrix, sd: &SpectralData, z: Complex64) -> f64 {
    let n = h.n();
    let g = resolvent_direct(h, z).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..n {
                s += c(g[(i, k)]) * c(g[(j, k)]).conj();
            }
            let t = tilde_green(sd, z, i + 1, j + 1).unwrap();
            worst = worst.max((t - s * z.im).norm());
        }
    }
    worst
}

/// Spectral parameters used by the identity checks: bulk, edge and outside the
/// spectrum, at two heights.
pub fn identity_points(instance: usize) -> Complex64 {
    let e = [-1.3, 0.0, 0.6, 1.95, 2.4][instance % 5];
    let eta = [0.05, 0.4][(instance / 5) % 2];
    Complex64::new(e, eta)
}

/// `H_ij = sqrt(s_ij) x_{phi(i,j)}` with the lower triangle conjugated, built
/// without the library's assembly routine.
pub fn assemble_by_hand(entries: &[Complex64], profile: &VarianceProfile) -> HermitianMatrix {
    let n = profile.n;
    let mut m = Mat::<c64>::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            let x = entries[k] * profile.get(i, j).sqrt();
            k += 1;
            m[(i, j)] = c64::new(x.re, x.im);
            m[(j, i)] = c64::new(x.re, -x.im);
            if i == j {
                m[(i, i)] = c64::new(x.re, 0.0);
            }
        }
    }
    HermitianMatrix::Complex(m)
}

/// `N |u(1)|^2` for a Haar-distributed unit vector in `C^N`: a normalized complex
/// Gaussian vector.
pub fn haar_first_overlap(n: usize, seed: u64, trial: u64) -> f64 {
    let mut rng = stream_rng(seed, trial, StreamTag::ORACLE);
    let mut norm = 0.0;
    let mut first = 0.0;
    for i in 0..n {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        let m = re * re + im * im;
        if i == 0 {
            first = m;
        }
        norm += m;
    }
    n as f64 * first / norm
}

pub fn gue(n: usize) -> EnsembleSpec {
    EnsembleSpec::gue(n).unwrap()
}

pub fn spectral(h: &HermitianMatrix) -> SpectralData {
    eigendecompose(h).unwrap()
}
