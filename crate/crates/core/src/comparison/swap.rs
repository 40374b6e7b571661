//! Entry-by-entry interpolation between two coupled samples.
//!
//! Positions are ordered by [`phi`] (row-major over the upper triangle). The hybrid
//! `H_gamma` carries the w-entry at every position `<= gamma` and the v-entry
//! elsewhere, so `H_0` is the v-sample and `H_{gamma_max}` the w-sample.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::{assemble_with, gamma_max, phi, phi_inverse, HermitianMatrix, SymmetryClass, VarianceProfile};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwapSchedule {
    pub n: usize,
    pub gamma_max: usize,
}

impl SwapSchedule {
    /// `Phi(i, j)` for `1 <= i <= j <= N`.
    pub fn forward(&self, i: usize, j: usize) -> Result<usize> {
        if i < 1 || i > j || j > self.n {
            return Err(Error::IndexOutOfRange(format!("pair ({i}, {j}) is not upper-triangular in N = {}", self.n)));
        }
        Ok(phi(self.n, i, j))
    }

    pub fn inverse(&self, gamma: usize) -> Result<(usize, usize)> {
        if gamma < 1 || gamma > self.gamma_max {
            return Err(Error::IndexOutOfRange(format!("gamma = {gamma} outside [1, {}]", self.gamma_max)));
        }
        Ok(phi_inverse(self.n, gamma))
    }
}

pub fn ordering_map(n: usize) -> Result<SwapSchedule> {
    if n == 0 {
        return Err(invalid("N must be positive"));
    }
    Ok(SwapSchedule { n, gamma_max: gamma_max(n) })
}

/// Standardized v- and w-entries of one coupled draw, both in `phi` order.
#[derive(Debug, Clone)]
pub struct CoupledEntries {
    pub v: Vec<Complex64>,
    pub w: Vec<Complex64>,
    pub profile: VarianceProfile,
    pub symmetry: SymmetryClass,
}

impl CoupledEntries {
    pub fn new(v: Vec<Complex64>, w: Vec<Complex64>, profile: VarianceProfile, symmetry: SymmetryClass) -> Result<Self> {
        let g = gamma_max(profile.n);
        if v.len() != g || w.len() != g {
            return Err(invalid(format!(
                "entry arrays of length {} and {} do not match gamma_max = {g}",
                v.len(),
                w.len()
            )));
        }
        Ok(Self { v, w, profile, symmetry })
    }

    pub fn n(&self) -> usize {
        self.profile.n
    }

    pub fn gamma_max(&self) -> usize {
        self.v.len()
    }

    pub fn hybrid(&self, gamma: usize) -> Result<HermitianMatrix> {
        hybrid_matrix(&self.v, &self.w, gamma, &self.profile, self.symmetry)
    }

    /// The swapped matrix entry `h_ab` of `H_{gamma-1}` (the v-entry at position
    /// `gamma`, scaled by the profile), with its 0-based position.
    pub fn swapped_entry(&self, gamma: usize) -> Result<(usize, usize, Complex64)> {
        let (a, b) = ordering_map(self.n())?.inverse(gamma)?;
        let mut h = self.v[gamma - 1] * self.profile.get(a - 1, b - 1).sqrt();
        if a == b || self.symmetry == SymmetryClass::RealSymmetric {
            h.im = 0.0;
        }
        Ok((a - 1, b - 1, h))
    }
}

/// `H_gamma`: w-entries at positions `<= gamma`, v-entries after.
pub fn hybrid_matrix(
    v: &[Complex64],
    w: &[Complex64],
    gamma: usize,
    profile: &VarianceProfile,
    symmetry: SymmetryClass,
) -> Result<HermitianMatrix> {
    let n = profile.n;
    let g = gamma_max(n);
    if v.len() != g || w.len() != g {
        return Err(invalid(format!("entry arrays of length {} and {} do not match gamma_max = {g}", v.len(), w.len())));
    }
    if gamma > g {
        return Err(Error::IndexOutOfRange(format!("gamma = {gamma} exceeds gamma_max = {g}")));
    }
    Ok(assemble_with(n, symmetry, |i, j| {
        let k = phi(n, i + 1, j + 1);
        let x = if k <= gamma { w[k - 1] } else { v[k - 1] };
        x * profile.get(i, j).sqrt()
    }))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Telescope {
    /// `d_gamma = F(H_{gamma-1}) - F(H_gamma)` for `gamma = 1..=gamma_max`.
    pub differences: Vec<f64>,
    pub sum: f64,
    /// `F(H^v) - F(H^w)`.
    pub endpoint_difference: f64,
    pub residual: f64,
}

/// Evaluates `F` along the whole hybrid chain.
pub fn telescope_decompose<F>(entries: &CoupledEntries, f: F) -> Result<Telescope>
where
    F: Fn(&HermitianMatrix) -> Result<f64> + Sync,
{
    let g = entries.gamma_max();
    let values = (0..=g)
        .into_par_iter()
        .map(|gamma| f(&entries.hybrid(gamma)?))
        .collect::<Result<Vec<f64>>>()?;
    let differences: Vec<f64> = values.windows(2).map(|w| w[0] - w[1]).collect();
    let sum: f64 = differences.iter().sum();
    let endpoint_difference = values[0] - values[g];
    Ok(Telescope {
        residual: (sum - endpoint_difference).abs(),
        differences,
        sum,
        endpoint_difference,
    })
}
