//! Closed-form semicircle analytics.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// A spectral parameter `z = E + i eta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralParameter {
    pub e: f64,
    pub eta: f64,
}

impl SpectralParameter {
    pub fn new(e: f64, eta: f64) -> Result<Self> {
        if !(eta > 0.0) || !e.is_finite() || !eta.is_finite() {
            return Err(invalid(format!("spectral parameter needs finite E and eta > 0, got E={e}, eta={eta}")));
        }
        Ok(Self { e, eta })
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.e, self.eta)
    }
}

/// Semicircle density `(1/2pi) sqrt((4 - E^2)_+)`.
pub fn rho_sc(e: f64) -> f64 {
    let s = 4.0 - e * e;
    if s <= 0.0 {
        0.0
    } else {
        s.sqrt() / (2.0 * PI)
    }
}

/// Integrated semicircle distribution.
pub fn n_sc(e: f64) -> f64 {
    if e <= -2.0 {
        return 0.0;
    }
    if e >= 2.0 {
        return 1.0;
    }
    0.5 + e * (4.0 - e * e).sqrt() / (4.0 * PI) + (e / 2.0).asin() / PI
}

/// Classical location `gamma_alpha`, the solution of `n_sc(gamma) = alpha / N`.
///
/// Bisection to a bracket of width 1e-14 followed by one Newton step, kept only if it
/// stays inside the bracket and improves the residual.
pub fn classical_location(alpha: usize, n: usize) -> Result<f64> {
    if n == 0 || alpha < 1 || alpha > n {
        return Err(Error::IndexOutOfRange(format!("alpha = {alpha} must lie in [1, {n}]")));
    }
    if alpha == n {
        return Ok(2.0);
    }
    let target = alpha as f64 / n as f64;
    let (mut lo, mut hi) = (-2.0_f64, 2.0_f64);
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if n_sc(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    let r = n_sc(x) - target;
    let d = rho_sc(x);
    if d > 0.0 {
        let y = x - r / d;
        if y >= lo && y <= hi && (n_sc(y) - target).abs() <= r.abs() {
            return Ok(y);
        }
    }
    Ok(x)
}

/// All classical locations `gamma_1 < ... < gamma_N`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassicalLocations {
    pub n: usize,
    pub gamma: Vec<f64>,
}

impl ClassicalLocations {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("N must be positive"));
        }
        let gamma = (1..=n).map(|a| classical_location(a, n)).collect::<Result<Vec<_>>>()?;
        Ok(Self { n, gamma })
    }

    /// `gamma_alpha` for 1-based `alpha`.
    pub fn get(&self, alpha: usize) -> f64 {
        self.gamma[alpha - 1]
    }

    /// CSV with columns `alpha,gamma`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["alpha", "gamma"])?;
        for (k, g) in self.gamma.iter().enumerate() {
            w.write_record([(k + 1).to_string(), g.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Stieltjes transform of the semicircle law, the root of `m^2 + z m + 1 = 0` with
/// positive imaginary part.
///
/// Both roots are formed; the larger one is computed directly and the smaller as its
/// reciprocal (the roots multiply to one), which avoids cancellation for large `|z|`.
pub fn m_sc(z: Complex64) -> Result<Complex64> {
    if !(z.im > 0.0) {
        return Err(invalid(format!("m_sc needs Im z > 0, got {z}")));
    }
    Ok(m_sc_unchecked(z))
}

pub(crate) fn m_sc_unchecked(z: Complex64) -> Complex64 {
    let s = (z * z - 4.0).sqrt();
    let a = (-z + s) * 0.5;
    let b = (-z - s) * 0.5;
    let (big, _) = if a.norm() >= b.norm() { (a, b) } else { (b, a) };
    let small = big.inv();
    if big.im > small.im {
        big
    } else {
        small
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{adaptive_simpson, SimpsonOptions};
    use proptest::prelude::*;

    #[test]
    fn density_values() {
        assert!((rho_sc(0.0) - 1.0 / PI).abs() < 1e-15);
        assert!((rho_sc(0.0) - 0.3183098862).abs() < 1e-10);
        assert_eq!(rho_sc(2.0), 0.0);
        assert_eq!(rho_sc(-2.0), 0.0);
        assert_eq!(rho_sc(3.0), 0.0);
        assert!((rho_sc(1.0) - 0.2756644477).abs() < 1e-10);
    }

    #[test]
    fn distribution_values() {
        assert_eq!(n_sc(-2.0), 0.0);
        assert_eq!(n_sc(-5.0), 0.0);
        assert_eq!(n_sc(5.0), 1.0);
        assert!((n_sc(0.0) - 0.5).abs() < 1e-16);
        let expected = 0.5 + 3f64.sqrt() / (4.0 * PI) + 1.0 / 6.0;
        assert!((n_sc(1.0) - expected).abs() < 1e-15);
        assert!((n_sc(1.0) - 0.8044989).abs() < 1e-7);
    }

    #[test]
    fn distribution_matches_quadrature_of_density() {
        for &e in &[-1.99f64, -1.5, -0.7, 0.0, 0.3, 1.0, 1.8, 1.9999] {
            // sqrt-singular endpoint: substitute x = -2 + t^2 so the integrand is smooth.
            let upper = (e + 2.0).sqrt();
            let q = adaptive_simpson(
                |t: f64| 2.0 * t * rho_sc(-2.0 + t * t),
                0.0,
                upper,
                SimpsonOptions::with_tol(1e-13),
            );
            assert!((q.value - n_sc(e)).abs() < 1e-10, "E={e}: {} vs {}", q.value, n_sc(e));
        }
    }

    #[test]
    fn classical_location_edge_cases() {
        assert_eq!(classical_location(100, 100).unwrap(), 2.0);
        assert!(classical_location(50, 100).unwrap().abs() < 1e-14);
        assert!(classical_location(0, 100).is_err());
        assert!(classical_location(101, 100).is_err());
    }

    #[test]
    fn first_classical_location_by_bisection_oracle() {
        // independent plain bisection on the closed form
        let target = 0.01;
        let (mut lo, mut hi) = (-2.0_f64, 2.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if n_sc(mid) < target {
                lo = mid
            } else {
                hi = mid
            }
        }
        let g = classical_location(1, 100).unwrap();
        assert!((g - lo).abs() < 1e-12);
        assert!((n_sc(g) - 0.01).abs() < 1e-12);
    }

    #[test]
    fn first_classical_location_scales_like_n_to_minus_two_thirds() {
        // n_sc(-2 + x) ~ (2 / 3pi) x^{3/2} near the edge, so (gamma_1 + 2) N^{2/3} -> (3pi/2)^{2/3}.
        let limit = (1.5 * PI).powf(2.0 / 3.0);
        let mut prev_err = f64::INFINITY;
        for &n in &[100usize, 1000, 10_000, 100_000] {
            let g = classical_location(1, n).unwrap();
            let c = (g + 2.0) * (n as f64).powf(2.0 / 3.0);
            let err = (c - limit).abs();
            assert!(err < prev_err);
            prev_err = err;
        }
        assert!(prev_err < 1e-2);
    }

    #[test]
    fn classical_locations_are_increasing_and_exact() {
        let cl = ClassicalLocations::new(1000).unwrap();
        for w in cl.gamma.windows(2) {
            assert!(w[0] < w[1]);
        }
        for (k, g) in cl.gamma.iter().enumerate() {
            assert!(*g > -2.0 && *g <= 2.0);
            assert!((n_sc(*g) - (k + 1) as f64 / 1000.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn m_sc_examples() {
        let m = m_sc(Complex64::new(0.0, 1.0)).unwrap();
        assert!(m.re.abs() < 1e-15);
        assert!((m.im - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-15);
        assert!((m.im - 0.6180339887).abs() < 1e-10);
        let m = m_sc(Complex64::new(0.0, 1e-9)).unwrap();
        assert!((m - Complex64::new(0.0, 1.0)).norm() < 1e-8);
        assert!(m_sc(Complex64::new(1.0, 0.0)).is_err());
        assert!(m_sc(Complex64::new(1.0, -0.1)).is_err());
    }

    #[test]
    fn m_sc_matches_stieltjes_integral() {
        // m_sc(z) = \int rho(x) / (x - z) dx, via x = 2 sin(t) to remove the edge singularity
        let z = Complex64::new(0.7, 0.3);
        let q = adaptive_simpson(
            |t: f64| {
                let x = 2.0 * t.sin();
                (x - z).inv() * (rho_sc(x) * 2.0 * t.cos())
            },
            -PI / 2.0,
            PI / 2.0,
            SimpsonOptions::with_tol(1e-12),
        );
        assert!((q.value - m_sc(z).unwrap()).norm() < 1e-10);
    }

    #[test]
    fn m_sc_branch_is_continuous_along_horizontal_lines() {
        for &eta in &[1e-3, 0.05, 1.0] {
            let mut prev = m_sc(Complex64::new(-5.0, eta)).unwrap();
            let mut e = -5.0;
            while e < 5.0 {
                e += 1e-3;
                let m = m_sc(Complex64::new(e, eta)).unwrap();
                assert!((m - prev).norm() < 0.05, "jump at E={e}, eta={eta}");
                prev = m;
            }
        }
    }

    proptest! {
        #[test]
        fn semicircle_symmetries(e in -3.0f64..3.0) {
            prop_assert!((rho_sc(e) - rho_sc(-e)).abs() < 1e-15);
            prop_assert!((n_sc(e) + n_sc(-e) - 1.0).abs() < 1e-14);
        }

        #[test]
        fn m_sc_fixed_point_and_bounds(e in -6.0f64..6.0, log_eta in -9.0f64..1.5) {
            let z = Complex64::new(e, 10f64.powf(log_eta));
            let m = m_sc(z).unwrap();
            prop_assert!(m.im > 0.0);
            prop_assert!(m.norm() <= 1.0 + 1e-12);
            prop_assert!((m + (z + m).inv()).norm() < 1e-12);
        }

        #[test]
        fn classical_location_inverts_distribution(n in 2usize..3000, frac in 0.0f64..1.0) {
            let alpha = 1 + ((n - 1) as f64 * frac) as usize;
            let g = classical_location(alpha, n).unwrap();
            prop_assert!((n_sc(g) - alpha as f64 / n as f64).abs() <= 1e-12);
        }
    }
}
