//! Smooth cutoffs built from the quintic smoothstep `6t^5 - 15t^4 + 10t^3`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Smoothstep value and first two derivatives at `t`, clamped outside `[0, 1]`.
#[inline]
pub fn smoothstep(t: f64) -> (f64, f64, f64) {
    if t <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if t >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let t2 = t * t;
    let s = t2 * t * (10.0 - 15.0 * t + 6.0 * t2);
    let d1 = 30.0 * t2 * (1.0 - t) * (1.0 - t);
    let d2 = 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t);
    (s, d1, d2)
}

/// `max |S'| = 15/8` and `max |S''| = 10/sqrt(3)`; the larger is the constant `C`
/// in `|f'| <= C/eta_d`, `|f''| <= C/eta_d^2`.
pub const SMOOTHSTEP_D1_MAX: f64 = 1.875;
pub const SMOOTHSTEP_D2_MAX: f64 = 5.773502691896258;

/// Smoothed indicator of `[e1, e2]`: one on the interval, zero outside
/// `[e1 - eta_d, e2 + eta_d]`, smoothstep ramps in between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothedIndicator {
    pub e1: f64,
    pub e2: f64,
    pub eta_d: f64,
}

impl SmoothedIndicator {
    pub fn new(e1: f64, e2: f64, eta_d: f64) -> Result<Self> {
        if !(e1 <= e2) || !(eta_d > 0.0) || !e1.is_finite() || !e2.is_finite() {
            return Err(invalid(format!(
                "smoothed indicator needs E1 <= E2 and eta_d > 0, got [{e1}, {e2}], {eta_d}"
            )));
        }
        Ok(Self { e1, e2, eta_d })
    }

    /// `(f, f', f'')` at `x`.
    #[inline]
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        if x < self.e1 {
            let (s, d1, d2) = smoothstep((x - self.e1 + self.eta_d) / self.eta_d);
            (s, d1 / self.eta_d, d2 / (self.eta_d * self.eta_d))
        } else if x > self.e2 {
            let (s, d1, d2) = smoothstep((self.e2 + self.eta_d - x) / self.eta_d);
            (s, -d1 / self.eta_d, d2 / (self.eta_d * self.eta_d))
        } else {
            (1.0, 0.0, 0.0)
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval(x).0
    }

    pub fn support(&self) -> (f64, f64) {
        (self.e1 - self.eta_d, self.e2 + self.eta_d)
    }

    /// The ramps `[e1 - eta_d, e1]` and `[e2, e2 + eta_d]`, where `f'` and `f''` live.
    pub fn ramps(&self) -> [(f64, f64); 2] {
        [(self.e1 - self.eta_d, self.e1), (self.e2, self.e2 + self.eta_d)]
    }

    pub fn derivative_constant(&self) -> f64 {
        SMOOTHSTEP_D2_MAX.max(SMOOTHSTEP_D1_MAX)
    }

    /// `int |f''|`, exactly `2 * 15/8 / eta_d` per ramp.
    pub fn second_derivative_l1(&self) -> f64 {
        2.0 * 2.0 * SMOOTHSTEP_D1_MAX / self.eta_d
    }
}

/// Bump equal to one within `1/3` of `center` and zero beyond `2/3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffQ {
    pub center: f64,
}

impl CutoffQ {
    /// The cutoff around `alpha - 1` used to select the `alpha`-th eigenvalue.
    pub fn for_index(alpha: usize) -> Self {
        Self {
            center: alpha as f64 - 1.0,
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        smoothstep(3.0 * (2.0 / 3.0 - (x - self.center).abs())).0
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let d = x - self.center;
        let s = smoothstep(3.0 * (2.0 / 3.0 - d.abs())).1;
        -3.0 * s * d.signum()
    }

    /// `max |q'| = 3 * 15/8`.
    pub fn derivative_bound(&self) -> f64 {
        3.0 * SMOOTHSTEP_D1_MAX
    }
}
