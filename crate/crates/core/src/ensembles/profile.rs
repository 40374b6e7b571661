//! Variance profiles and their structural checks.

use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileKind {
    /// All variances `1/N`.
    Wigner,
    /// Circulant band: variance constant on `dist(i, j) <= floor(c N / 2)`, zero
    /// elsewhere, with `dist` the distance modulo `N`.
    Band { c: f64 },
    Custom,
}

/// Symmetric `N x N` matrix of entry variances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceProfile {
    pub n: usize,
    pub kind: ProfileKind,
    /// Row-major variances.
    sigma2: Vec<f64>,
    /// `N * max sigma2`, the smallest constant with `sigma2 <= C0 / N`.
    pub c0: f64,
}

impl VarianceProfile {
    pub fn wigner(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(invalid(format!("profile needs N >= 2, got {n}")));
        }
        Ok(Self::from_parts(n, ProfileKind::Wigner, vec![1.0 / n as f64; n * n]))
    }

    pub fn band(n: usize, c: f64) -> Result<Self> {
        if n < 2 {
            return Err(invalid(format!("profile needs N >= 2, got {n}")));
        }
        if !(c > 0.0 && c <= 1.0) {
            return Err(invalid(format!("band width fraction must lie in (0, 1], got {c}")));
        }
        let w = (c * n as f64 / 2.0).floor() as usize;
        if w == 0 {
            return Err(invalid(format!(
                "band c={c} at N={n} keeps only the diagonal; rows cannot carry a spread-out unit sum"
            )));
        }
        let dist = |i: usize, j: usize| {
            let d = i.abs_diff(j);
            d.min(n - d)
        };
        let count = (0..n).filter(|&j| dist(0, j) <= w).count();
        let v = 1.0 / count as f64;
        let mut sigma2 = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if dist(i, j) <= w {
                    sigma2[i * n + j] = v;
                }
            }
        }
        Ok(Self::from_parts(n, ProfileKind::Band { c }, sigma2))
    }

    /// A user-supplied profile. Only shape, symmetry and nonnegativity are enforced;
    /// the stochasticity conditions are reported by [`validate_profile`].
    pub fn custom(n: usize, sigma2: Vec<f64>) -> Result<Self> {
        if n < 1 || sigma2.len() != n * n {
            return Err(invalid(format!("custom profile needs N*N = {} entries, got {}", n * n, sigma2.len())));
        }
        for i in 0..n {
            for j in 0..n {
                let s = sigma2[i * n + j];
                if !(s >= 0.0) || !s.is_finite() {
                    return Err(invalid(format!("variance at ({}, {}) is {s}", i + 1, j + 1)));
                }
                if s != sigma2[j * n + i] {
                    return Err(invalid(format!("profile is not symmetric at ({}, {})", i + 1, j + 1)));
                }
            }
        }
        Ok(Self::from_parts(n, ProfileKind::Custom, sigma2))
    }

    fn from_parts(n: usize, kind: ProfileKind, sigma2: Vec<f64>) -> Self {
        let max = sigma2.iter().fold(0.0_f64, |m, &s| m.max(s));
        Self {
            n,
            kind,
            sigma2,
            c0: n as f64 * max,
        }
    }

    /// Variance of entry `(i, j)`, 0-based.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.sigma2[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.sigma2
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.sigma2[i * self.n..(i + 1) * self.n].iter().sum()
    }
}

pub fn make_variance_profile(kind: ProfileKind, n: usize) -> Result<VarianceProfile> {
    match kind {
        ProfileKind::Wigner => VarianceProfile::wigner(n),
        ProfileKind::Band { c } => VarianceProfile::band(n, c),
        ProfileKind::Custom => Err(invalid("custom profiles are built from explicit variances")),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileReport {
    pub row_sum_max_err: f64,
    pub entry_bound_c0: f64,
    /// Second-largest eigenvalue of `B`, an estimate of `1 - delta_+`.
    pub spectral_gap_lower: f64,
    /// Smallest eigenvalue of `B`, an estimate of `-1 + delta_-`.
    pub spectral_gap_upper: f64,
    pub simple_top_eigenvalue: bool,
    pub violations: Vec<String>,
}

impl ProfileReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

const ROW_SUM_TOL: f64 = 1e-12;
const SIMPLE_TOL: f64 = 1e-10;

/// Checks unit row sums, the entry bound and the spectral gaps of `B`.
pub fn validate_profile(profile: &VarianceProfile) -> Result<ProfileReport> {
    let n = profile.n;
    let row_sum_max_err = (0..n).map(|i| (profile.row_sum(i) - 1.0).abs()).fold(0.0, f64::max);
    let b = Mat::<f64>::from_fn(n, n, |i, j| profile.get(i, j));
    let evals = b
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigen(format!("variance profile: {e:?}")));
    crate::simd::clear_upper_state();
    let evals = evals?;
    let top = evals[n - 1];
    let second = if n >= 2 { evals[n - 2] } else { f64::NEG_INFINITY };
    let smallest = evals[0];
    let simple_top_eigenvalue = (top - 1.0).abs() <= SIMPLE_TOL && second < 1.0 - SIMPLE_TOL;
    let mut violations = Vec::new();
    if row_sum_max_err > ROW_SUM_TOL {
        violations.push(format!("row sums deviate from 1 by up to {row_sum_max_err:e}"));
    }
    if !simple_top_eigenvalue {
        violations.push(format!("top eigenvalue {top} is not a simple eigenvalue 1 (next {second})"));
    }
    if smallest <= -1.0 + SIMPLE_TOL {
        violations.push(format!("smallest eigenvalue {smallest} leaves no gap above -1"));
    }
    Ok(ProfileReport {
        row_sum_max_err,
        entry_bound_c0: profile.c0,
        spectral_gap_lower: second,
        spectral_gap_upper: smallest,
        simple_top_eigenvalue,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wigner_profile() {
        let p = VarianceProfile::wigner(4).unwrap();
        assert!(p.as_slice().iter().all(|&s| s == 0.25));
        for n in [2, 3, 7, 100, 1000] {
            let p = VarianceProfile::wigner(n).unwrap();
            for i in 0..n {
                assert!((p.row_sum(i) - 1.0).abs() <= 1e-12);
            }
            assert!((p.c0 - 1.0).abs() < 1e-12);
        }
        assert!(VarianceProfile::wigner(1).is_err());
    }

    #[test]
    fn band_profile() {
        let p = VarianceProfile::band(100, 0.5).unwrap();
        for i in 0..100 {
            assert!((p.row_sum(i) - 1.0).abs() <= 1e-12);
            for j in 0..100 {
                let d = i.abs_diff(j).min(100 - i.abs_diff(j));
                assert_eq!(p.get(i, j) == 0.0, d > 25, "({i},{j})");
                assert_eq!(p.get(i, j), p.get(j, i));
            }
        }
        assert!((p.c0 - 100.0 / 51.0).abs() < 1e-12);
        // full band at odd and even N
        for n in [9, 10] {
            let p = VarianceProfile::band(n, 1.0).unwrap();
            assert!((0..n).all(|i| (p.row_sum(i) - 1.0).abs() <= 1e-12));
        }
        assert!(VarianceProfile::band(100, 0.0).is_err());
        assert!(VarianceProfile::band(100, 1.5).is_err());
        assert!(VarianceProfile::band(10, 0.1).is_err());
    }

    #[test]
    fn wigner_report() {
        let r = validate_profile(&VarianceProfile::wigner(4).unwrap()).unwrap();
        assert!(r.simple_top_eigenvalue);
        assert!(r.spectral_gap_lower.abs() < 1e-10);
        assert!(r.spectral_gap_upper.abs() < 1e-10);
        assert!(r.ok());
        let r = validate_profile(&VarianceProfile::wigner(300).unwrap()).unwrap();
        assert!(r.spectral_gap_lower.abs() < 1e-10);
    }

    #[test]
    fn zero_row_is_flagged() {
        let n = 3;
        let mut s = vec![0.5; n * n];
        for k in 0..n {
            s[k] = 0.0;
            s[k * n] = 0.0;
        }
        let r = validate_profile(&VarianceProfile::custom(n, s).unwrap()).unwrap();
        assert_eq!(r.row_sum_max_err, 1.0);
        assert!(!r.ok());
    }

    #[test]
    fn band_report_has_a_gap() {
        let p = VarianceProfile::band(100, 0.5).unwrap();
        let r = validate_profile(&p).unwrap();
        assert!(r.spectral_gap_lower < 1.0);
        assert!(r.simple_top_eigenvalue);
        // circulant oracle: eigenvalues are (1/51) sum_{|d| <= 25} cos(2 pi k d / N)
        let mut eig: Vec<f64> = (0..100)
            .map(|k| {
                (-25i32..=25)
                    .map(|d| (2.0 * std::f64::consts::PI * k as f64 * d as f64 / 100.0).cos())
                    .sum::<f64>()
                    / 51.0
            })
            .collect();
        eig.sort_by(f64::total_cmp);
        assert!((r.spectral_gap_lower - eig[98]).abs() < 1e-12);
        assert!((r.spectral_gap_upper - eig[0]).abs() < 1e-12);
        assert_eq!(validate_profile(&p).unwrap(), r);
    }

    #[test]
    fn custom_rejects_asymmetry() {
        assert!(VarianceProfile::custom(2, vec![0.5, 0.4, 0.5, 0.5]).is_err());
        assert!(VarianceProfile::custom(2, vec![0.5, 0.5, 0.5]).is_err());
        assert!(VarianceProfile::custom(2, vec![-0.5, 0.5, 0.5, 0.5]).is_err());
    }
}
