//! Reproducible sampling of generalized Wigner matrices.

use faer::{c64, Mat};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use super::{EnsembleSpec, SymmetryClass, VarianceProfile};
use crate::error::{invalid, Result};
use crate::harness::seed::{derive_seed, StreamTag};

/// Number of upper-triangular index pairs, `N (N + 1) / 2`.
pub fn gamma_max(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Row-major position of the pair `(i, j)`, `1 <= i <= j <= N`, as a 1-based index.
#[inline]
pub fn phi(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(1 <= i && i <= j && j <= n);
    (i - 1) * (2 * n + 2 - i) / 2 + (j - i) + 1
}

/// Inverse of [`phi`].
pub fn phi_inverse(n: usize, gamma: usize) -> (usize, usize) {
    debug_assert!(gamma >= 1 && gamma <= gamma_max(n));
    // row i holds N - i + 1 pairs
    let mut start = 1;
    for i in 1..=n {
        let len = n - i + 1;
        if gamma < start + len {
            return (i, i + (gamma - start));
        }
        start += len;
    }
    unreachable!("gamma {gamma} out of range for N = {n}")
}

/// A dense Hermitian (complex) or symmetric (real) matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum HermitianMatrix {
    Real(Mat<f64>),
    Complex(Mat<c64>),
}

impl HermitianMatrix {
    pub fn n(&self) -> usize {
        match self {
            HermitianMatrix::Real(m) => m.nrows(),
            HermitianMatrix::Complex(m) => m.nrows(),
        }
    }

    pub fn symmetry(&self) -> SymmetryClass {
        match self {
            HermitianMatrix::Real(_) => SymmetryClass::RealSymmetric,
            HermitianMatrix::Complex(_) => SymmetryClass::ComplexHermitian,
        }
    }

    /// Entry `(i, j)`, 0-based.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        match self {
            HermitianMatrix::Real(m) => Complex64::new(m[(i, j)], 0.0),
            HermitianMatrix::Complex(m) => m[(i, j)],
        }
    }

    pub fn from_real_fn(n: usize, f: impl FnMut(usize, usize) -> f64) -> Self {
        HermitianMatrix::Real(Mat::from_fn(n, n, f))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        HermitianMatrix::Real(Mat::from_fn(n, n, |i, j| if i == j { values[i] } else { 0.0 }))
    }

    pub fn zeros(n: usize) -> Self {
        HermitianMatrix::Real(Mat::zeros(n, n))
    }

    pub fn trace(&self) -> f64 {
        (0..self.n()).map(|i| self.get(i, i).re).sum()
    }

    pub fn max_abs(&self) -> f64 {
        let n = self.n();
        let mut m: f64 = 0.0;
        for j in 0..n {
            for i in 0..n {
                m = m.max(self.get(i, j).norm());
            }
        }
        m
    }

    /// Exact check of `H == H*`.
    pub fn is_hermitian(&self) -> bool {
        let n = self.n();
        (0..n).all(|i| (0..=i).all(|j| self.get(i, j) == self.get(j, i).conj()))
    }

    pub fn to_complex(&self) -> Mat<c64> {
        match self {
            HermitianMatrix::Real(m) => Mat::from_fn(m.nrows(), m.ncols(), |i, j| c64::new(m[(i, j)], 0.0)),
            HermitianMatrix::Complex(m) => m.clone(),
        }
    }
}

/// One drawn matrix together with the standardized entries that produced it.
#[derive(Debug, Clone)]
pub struct MatrixSample {
    pub h: HermitianMatrix,
    /// Standardized entries `xi` in `phi` order; `h_ij = sigma_ij xi_ij` for `i <= j`.
    pub upper_entries: Vec<Complex64>,
    pub seed: u64,
}

/// Draws the standardized entry at position `gamma` of the stream `seed`.
///
/// Each entry has its own generator keyed by `(seed, gamma)`, so any single entry
/// can be regenerated without drawing the others.
pub fn draw_entry(spec: &EnsembleSpec, seed: u64, gamma: usize, diagonal: bool) -> Complex64 {
    let mut rng = SplitMix64::seed_from_u64(derive_seed(seed, gamma as u64, StreamTag::ENTRY));
    if diagonal {
        return Complex64::new(spec.diagonal_law.sample(&mut rng), 0.0);
    }
    match spec.symmetry {
        SymmetryClass::RealSymmetric => Complex64::new(spec.off_diagonal_law.sample(&mut rng), 0.0),
        SymmetryClass::ComplexHermitian => {
            let x = spec.off_diagonal_law.sample(&mut rng);
            let y = spec.off_diagonal_law.sample(&mut rng);
            Complex64::new(x, y) * std::f64::consts::FRAC_1_SQRT_2
        }
    }
}

/// All standardized entries of the stream `seed`, in `phi` order.
pub fn draw_entries(spec: &EnsembleSpec, seed: u64) -> Vec<Complex64> {
    let n = spec.n();
    let mut out = Vec::with_capacity(gamma_max(n));
    for i in 1..=n {
        for j in i..=n {
            out.push(draw_entry(spec, seed, out.len() + 1, i == j));
        }
    }
    out
}

/// Scales standardized entries by the profile and fills in the lower triangle.
pub fn assemble(
    entries: &[Complex64],
    profile: &VarianceProfile,
    symmetry: SymmetryClass,
) -> Result<HermitianMatrix> {
    let n = profile.n;
    if entries.len() != gamma_max(n) {
        return Err(invalid(format!(
            "expected {} entries for N = {n}, got {}",
            gamma_max(n),
            entries.len()
        )));
    }
    Ok(assemble_with(n, symmetry, |i, j| {
        entries[phi(n, i + 1, j + 1) - 1] * profile.get(i, j).sqrt()
    }))
}

/// Builds a matrix from its upper triangle `f(i, j)`, `i <= j` (0-based). Diagonal
/// values keep only their real part.
pub(crate) fn assemble_with(
    n: usize,
    symmetry: SymmetryClass,
    mut f: impl FnMut(usize, usize) -> Complex64,
) -> HermitianMatrix {
    match symmetry {
        SymmetryClass::RealSymmetric => {
            let mut m = Mat::<f64>::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    let v = f(i, j).re;
                    m[(i, j)] = v;
                    m[(j, i)] = v;
                }
            }
            HermitianMatrix::Real(m)
        }
        SymmetryClass::ComplexHermitian => {
            let mut m = Mat::<c64>::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    let v = f(i, j);
                    if i == j {
                        m[(i, i)] = c64::new(v.re, 0.0);
                    } else {
                        m[(i, j)] = v;
                        m[(j, i)] = v.conj();
                    }
                }
            }
            HermitianMatrix::Complex(m)
        }
    }
}

/// Draws one matrix; a pure function of `(spec, seed)`.
pub fn sample_matrix(spec: &EnsembleSpec, seed: u64) -> Result<MatrixSample> {
    let upper_entries = draw_entries(spec, seed);
    let h = assemble(&upper_entries, &spec.profile, spec.symmetry)?;
    Ok(MatrixSample { h, upper_entries, seed })
}

impl MatrixSample {
    /// Rebuilds `H` from the recorded entries.
    pub fn rebuild(&self, spec: &EnsembleSpec) -> Result<HermitianMatrix> {
        assemble(&self.upper_entries, &spec.profile, spec.symmetry)
    }
}

/// Serializable summary of a sample, used by the `sample` experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleSummary {
    pub n: usize,
    pub seed: u64,
    pub trace: f64,
    pub max_abs_entry: f64,
    pub off_diagonal_mean: f64,
    pub off_diagonal_second_moment: f64,
}

pub fn summarize(sample: &MatrixSample) -> SampleSummary {
    let h = &sample.h;
    let n = h.n();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut sq = 0.0;
    let mut count = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            let v = h.get(i, j);
            sum += v;
            sq += v.norm_sqr();
            count += 1;
        }
    }
    let count = count.max(1) as f64;
    SampleSummary {
        n,
        seed: sample.seed,
        trace: h.trace(),
        max_abs_entry: h.max_abs(),
        off_diagonal_mean: (sum / count).re,
        off_diagonal_second_moment: sq / count,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::EntryLaw;

    #[test]
    fn phi_small_cases() {
        assert_eq!(phi(2, 1, 1), 1);
        assert_eq!(phi(2, 1, 2), 2);
        assert_eq!(phi(2, 2, 2), 3);
        assert_eq!(gamma_max(2), 3);
        assert_eq!(gamma_max(100), 5050);
        assert_eq!(phi(100, 100, 100), 5050);
    }

    #[test]
    fn phi_is_a_bijection() {
        for n in 1..=12 {
            let mut expected = 1;
            for i in 1..=n {
                for j in i..=n {
                    assert_eq!(phi(n, i, j), expected);
                    assert_eq!(phi_inverse(n, expected), (i, j));
                    expected += 1;
                }
            }
            assert_eq!(expected - 1, gamma_max(n));
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let spec = EnsembleSpec::gue(30).unwrap();
        let a = sample_matrix(&spec, 17).unwrap();
        let b = sample_matrix(&spec, 17).unwrap();
        assert_eq!(a.h, b.h);
        assert_eq!(a.upper_entries, b.upper_entries);
        let c = sample_matrix(&spec, 18).unwrap();
        assert_ne!(a.h, c.h);
        assert_eq!(a.rebuild(&spec).unwrap(), a.h);
    }

    #[test]
    fn hermitian_with_real_diagonal() {
        let spec = EnsembleSpec::gue(25).unwrap();
        let s = sample_matrix(&spec, 3).unwrap();
        assert!(s.h.is_hermitian());
        for i in 0..25 {
            assert_eq!(s.h.get(i, i).im, 0.0);
        }
        let spec = EnsembleSpec::goe(25).unwrap();
        assert!(sample_matrix(&spec, 3).unwrap().h.is_hermitian());
    }

    #[test]
    fn off_diagonal_mean_clt_bound() {
        let n = 2000;
        let spec = EnsembleSpec::goe(n).unwrap();
        let s = sample_matrix(&spec, 2024).unwrap();
        let summary = summarize(&s);
        let count = (n * (n - 1) / 2) as f64;
        // entries have standard deviation N^{-1/2}; the mean of standardized entries
        // is within 3 count^{-1/2}
        let standardized_mean = summary.off_diagonal_mean * (n as f64).sqrt();
        assert!(standardized_mean.abs() < 3.0 / count.sqrt(), "{standardized_mean}");
        assert!((summary.off_diagonal_second_moment * n as f64 - 1.0).abs() < 0.01);
    }

    #[test]
    fn complex_entries_have_profile_variance() {
        let n = 400;
        let spec = EnsembleSpec::new(
            SymmetryClass::ComplexHermitian,
            VarianceProfile::band(n, 0.5).unwrap(),
            EntryLaw::rademacher(),
            EntryLaw::rademacher(),
        )
        .unwrap();
        let s = sample_matrix(&spec, 8).unwrap();
        let mut ratio = 0.0;
        let mut count = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                let v = spec.profile.get(i, j);
                if v > 0.0 {
                    ratio += s.h.get(i, j).norm_sqr() / v;
                    count += 1.0;
                } else {
                    assert_eq!(s.h.get(i, j), Complex64::new(0.0, 0.0));
                }
            }
        }
        // Rademacher real and imaginary parts give |xi|^2 = 1 exactly
        assert!((ratio / count - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_entries_regenerate() {
        let spec = EnsembleSpec::gue(10).unwrap();
        let all = draw_entries(&spec, 5);
        let (i, j) = phi_inverse(10, 23);
        assert_eq!(all[22], draw_entry(&spec, 5, 23, i == j));
    }

    #[test]
    fn assemble_rejects_wrong_length() {
        let p = VarianceProfile::wigner(4).unwrap();
        assert!(assemble(&[Complex64::new(0.0, 0.0); 3], &p, SymmetryClass::RealSymmetric).is_err());
    }
}
