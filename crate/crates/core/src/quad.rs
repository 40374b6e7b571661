//! Adaptive Simpson quadrature.
//!
//! The integrands met in this crate are Lorentzian-shaped with widths down to
//! `eta ~ 1e-4`, so the rule accepts a step cap: the interval is first cut into
//! panels no wider than `max_step` and each panel is refined adaptively with the
//! usual Richardson-corrected Simpson estimate.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

/// Values an integrand may return.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SimpsonOptions {
    /// Absolute tolerance for the whole interval.
    pub abs_tol: f64,
    /// Upper bound on the width of the initial panels.
    pub max_step: Option<f64>,
    /// Maximum bisection depth below a panel.
    pub max_depth: u32,
}

impl Default for SimpsonOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            max_step: None,
            max_depth: 50,
        }
    }
}

impl SimpsonOptions {
    pub fn with_tol(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }

    pub fn max_step(mut self, step: f64) -> Self {
        self.max_step = Some(step);
        self
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<V> {
    pub value: V,
    pub error_estimate: f64,
    pub evaluations: usize,
    /// False if some subinterval hit `max_depth` before meeting its tolerance.
    pub converged: bool,
}

struct State<F> {
    f: F,
    evaluations: usize,
    converged: bool,
    error: f64,
    max_depth: u32,
}

impl<V: QuadValue, F: FnMut(f64) -> V> State<F> {
    fn eval(&mut self, x: f64) -> V {
        self.evaluations += 1;
        (self.f)(x)
    }

    #[allow(clippy::too_many_arguments)]
    fn refine(&mut self, a: f64, b: f64, fa: V, fm: V, fb: V, whole: V, tol: f64, depth: u32) -> V {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = self.eval(lm);
        let frm = self.eval(rm);
        let left = simpson(a, m, fa, flm, fm);
        let right = simpson(m, b, fm, frm, fb);
        let delta = left + right - whole;
        let err = delta.magnitude();
        if err <= 15.0 * tol || !(m > a && m < b) {
            self.error += err / 15.0;
            return left + right + delta * (1.0 / 15.0);
        }
        if depth >= self.max_depth {
            self.converged = false;
            self.error += err / 15.0;
            return left + right + delta * (1.0 / 15.0);
        }
        let l = self.refine(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1);
        let r = self.refine(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
        l + r
    }
}

fn simpson<V: QuadValue>(a: f64, b: f64, fa: V, fm: V, fb: V) -> V {
    (fa + fm * 4.0 + fb) * ((b - a) / 6.0)
}

/// Integrates `f` over `[a, b]` (returns zero when `b <= a`).
pub fn adaptive_simpson<V, F>(f: F, a: f64, b: f64, opts: SimpsonOptions) -> QuadResult<V>
where
    V: QuadValue,
    F: FnMut(f64) -> V,
{
    if !(b > a) {
        return QuadResult {
            value: V::zero(),
            error_estimate: 0.0,
            evaluations: 0,
            converged: true,
        };
    }
    let width = b - a;
    let panels = match opts.max_step {
        Some(step) if step > 0.0 => (width / step).ceil().max(1.0) as usize,
        _ => 1,
    };
    let h = width / panels as f64;
    let mut st = State {
        f,
        evaluations: 0,
        converged: true,
        error: 0.0,
        max_depth: opts.max_depth,
    };
    let mut total = V::zero();
    let mut x0 = a;
    let mut f0 = st.eval(a);
    for k in 0..panels {
        let x1 = if k + 1 == panels { b } else { a + (k + 1) as f64 * h };
        let xm = 0.5 * (x0 + x1);
        let fm = st.eval(xm);
        let f1 = st.eval(x1);
        let whole = simpson(x0, x1, f0, fm, f1);
        let tol = opts.abs_tol * (x1 - x0) / width;
        total = total + st.refine(x0, x1, f0, fm, f1, whole, tol, 0);
        x0 = x1;
        f0 = f1;
    }
    QuadResult {
        value: total,
        error_estimate: st.error,
        evaluations: st.evaluations,
        converged: st.converged,
    }
}

/// Integrates over consecutive pieces `[p_0, p_1], [p_1, p_2], ...`, splitting the
/// tolerance in proportion to width. Use this when the integrand has known kinks.
pub fn adaptive_simpson_pieces<V, F>(mut f: F, breaks: &[f64], opts: SimpsonOptions) -> QuadResult<V>
where
    V: QuadValue,
    F: FnMut(f64) -> V,
{
    let mut out = QuadResult {
        value: V::zero(),
        error_estimate: 0.0,
        evaluations: 0,
        converged: true,
    };
    if breaks.len() < 2 {
        return out;
    }
    let total = breaks[breaks.len() - 1] - breaks[0];
    for w in breaks.windows(2) {
        if !(w[1] > w[0]) {
            continue;
        }
        let piece_opts = SimpsonOptions {
            abs_tol: opts.abs_tol * (w[1] - w[0]) / total,
            ..opts
        };
        let r = adaptive_simpson(&mut f, w[0], w[1], piece_opts);
        out.value = out.value + r.value;
        out.error_estimate += r.error_estimate;
        out.evaluations += r.evaluations;
        out.converged &= r.converged;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = adaptive_simpson(|x: f64| x * x * x - 2.0 * x, 0.0, 2.0, SimpsonOptions::default());
        assert!((r.value - 0.0).abs() < 1e-14);
        assert!(r.converged);
    }

    #[test]
    fn lorentzian_with_step_cap() {
        let eta = 1e-4;
        let f = |x: f64| eta / (std::f64::consts::PI * (x * x + eta * eta));
        let r = adaptive_simpson(f, -0.3, 0.2, SimpsonOptions::with_tol(1e-10).max_step(eta / 10.0));
        let exact = ((0.2 / eta).atan() - (-0.3 / eta).atan()) / std::f64::consts::PI;
        assert!((r.value - exact).abs() < 1e-9, "{} vs {}", r.value, exact);
    }

    #[test]
    fn complex_integrand() {
        let r = adaptive_simpson(
            |x: f64| Complex64::new(x.cos(), x.sin()),
            0.0,
            std::f64::consts::FRAC_PI_2,
            SimpsonOptions::with_tol(1e-12),
        );
        assert!((r.value - Complex64::new(1.0, 1.0)).norm() < 1e-11);
    }

    #[test]
    fn empty_interval_is_zero() {
        let r = adaptive_simpson(|x: f64| x, 1.0, 1.0, SimpsonOptions::default());
        assert_eq!(r.value, 0.0);
        assert_eq!(r.evaluations, 0);
    }

    #[test]
    fn pieces_handle_kinks() {
        let r = adaptive_simpson_pieces(|x: f64| x.abs(), &[-1.0, 0.0, 2.0], SimpsonOptions::with_tol(1e-12));
        assert!((r.value - 2.5).abs() < 1e-12);
    }
}
