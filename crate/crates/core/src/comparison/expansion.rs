//! Finite resolvent expansion around the matrix with one entry pair removed.
//!
//! With `Q` equal to `H_{gamma-1}` except for zeros at `(a, b)` and `(b, a)`, and
//! `V = H_{gamma-1} - Q`, the resolvents `S = (H_{gamma-1} - z)^{-1}` and
//! `R = (Q - z)^{-1}` satisfy
//!
//! ```text
//! S = sum_{k=0}^{m} (-R V)^k R + (-R V)^{m+1} S
//! ```
//!
//! so the order-`m` remainder has max-entry norm at most `(||R|| ||V||)^{m+1} ||S||`.

use faer::{c64, Mat};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::swap::CoupledEntries;
use crate::ensembles::HermitianMatrix;
use crate::error::{invalid, Result};
use crate::resolvent::resolvent_direct;
use crate::spectral::eigenvalues;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionRemainder {
    pub gamma: usize,
    /// 0-based position of the swapped pair.
    pub a: usize,
    pub b: usize,
    pub entry: Complex64,
    /// `max_ij |(S - sum_{k<=m} (-RV)^k R)_ij|` for `m = 1..=order`.
    pub remainders: Vec<f64>,
    /// `(||R|| |h_ab|)^{m+1} ||S||` for the same orders.
    pub bounds: Vec<f64>,
    pub r_norm: f64,
    pub s_norm: f64,
}

impl ExpansionRemainder {
    pub fn within_bounds(&self) -> bool {
        self.remainders.iter().zip(&self.bounds).all(|(r, b)| *r <= *b * (1.0 + 1e-9) + 1e-13)
    }
}

/// Operator norm of `(H - z)^{-1}`: `1 / min |lambda - z|`.
fn resolvent_norm(h: &HermitianMatrix, z: Complex64) -> Result<f64> {
    let l = eigenvalues(h)?;
    let d = l.iter().map(|&x| (x - z).norm()).fold(f64::INFINITY, f64::min);
    Ok(1.0 / d)
}

fn zero_pair(h: &HermitianMatrix, a: usize, b: usize) -> HermitianMatrix {
    match h {
        HermitianMatrix::Real(m) => {
            let mut q = m.clone();
            q[(a, b)] = 0.0;
            q[(b, a)] = 0.0;
            HermitianMatrix::Real(q)
        }
        HermitianMatrix::Complex(m) => {
            let mut q = m.clone();
            q[(a, b)] = c64::new(0.0, 0.0);
            q[(b, a)] = c64::new(0.0, 0.0);
            HermitianMatrix::Complex(q)
        }
    }
}

fn max_abs_diff(x: &Mat<c64>, y: &Mat<c64>) -> f64 {
    let mut m: f64 = 0.0;
    for j in 0..x.ncols() {
        for i in 0..x.nrows() {
            m = m.max((x[(i, j)] - y[(i, j)]).norm());
        }
    }
    m
}

/// Expansion remainders of orders `1..=order` at position `gamma` of the chain.
pub fn resolvent_expansion_remainder(
    entries: &CoupledEntries,
    gamma: usize,
    z: Complex64,
    order: usize,
) -> Result<ExpansionRemainder> {
    if !(1..=5).contains(&order) {
        return Err(invalid(format!("expansion order must lie in 1..=5, got {order}")));
    }
    if !(z.im > 0.0) {
        return Err(invalid(format!("expansion needs Im z > 0, got {z}")));
    }
    if gamma < 1 || gamma > entries.gamma_max() {
        return Err(invalid(format!("gamma = {gamma} outside [1, {}]", entries.gamma_max())));
    }
    let (a, b, entry) = entries.swapped_entry(gamma)?;
    let h = entries.hybrid(gamma - 1)?;
    let q = zero_pair(&h, a, b);
    let s = resolvent_direct(&h, z)?;
    let r = resolvent_direct(&q, z)?;
    let n = h.n();
    let hab = c64::new(h.get(a, b).re, h.get(a, b).im);
    let hba = hab.conj();

    // T_k = -R V T_{k-1}; V T has rows a and b only, so each step is two rank-one updates
    let mut t = r.clone();
    let mut partial = r.clone();
    let mut remainders = Vec::with_capacity(order);
    for _ in 0..order {
        let row_a: Vec<c64> = (0..n).map(|c| t[(b, c)] * hab).collect();
        let next = if a == b {
            Mat::from_fn(n, n, |i, c| -(r[(i, a)] * row_a[c]))
        } else {
            let row_b: Vec<c64> = (0..n).map(|c| t[(a, c)] * hba).collect();
            Mat::from_fn(n, n, |i, c| -(r[(i, a)] * row_a[c] + r[(i, b)] * row_b[c]))
        };
        partial = &partial + &next;
        remainders.push(max_abs_diff(&s, &partial));
        t = next;
    }
    let r_norm = resolvent_norm(&q, z)?;
    let s_norm = resolvent_norm(&h, z)?;
    let v_norm = hab.norm();
    let bounds = (1..=order).map(|m| (r_norm * v_norm).powi(m as i32 + 1) * s_norm).collect();
    Ok(ExpansionRemainder {
        gamma,
        a,
        b,
        entry,
        remainders,
        bounds,
        r_norm,
        s_norm,
    })
}
