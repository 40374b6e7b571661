//! Standardized entry laws with exact moments.

use num_complex::Complex64;
use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::SymmetryClass;
use crate::error::{invalid, Error, Result};

const STANDARDIZE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LawKind {
    Gaussian,
    Rademacher,
    /// Atoms `{-a, 0, a}` with weights `{p, 1 - 2p, p}`.
    ThreePoint { a: f64, p: f64 },
    Discrete { atoms: Vec<f64>, weights: Vec<f64> },
}

/// A real law with mean zero and unit variance; entries are scaled by `sigma_ij`
/// only when a matrix is sampled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryLaw {
    pub kind: LawKind,
    /// Exact raw moments `m1..m6`.
    pub moments: [f64; 6],
    /// A decay exponent `theta` with `P(|X| >= x) <= exp(-x^theta) / theta` for all `x`,
    /// when one is known in closed form. Bounded laws leave this empty.
    pub tail_param: Option<f64>,
}

impl EntryLaw {
    pub fn gaussian() -> Self {
        Self {
            kind: LawKind::Gaussian,
            moments: [0.0, 1.0, 0.0, 3.0, 0.0, 15.0],
            // 2 P(Z >= x) <= exp(-x^0.9) / 0.9 for every x >= 0 (the bound fails for
            // exponents above about 0.95 near x = 0.5).
            tail_param: Some(0.9),
        }
    }

    pub fn rademacher() -> Self {
        Self {
            kind: LawKind::Rademacher,
            moments: [0.0, 1.0, 0.0, 1.0, 0.0, 1.0],
            tail_param: None,
        }
    }

    pub fn three_point(a: f64, p: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(invalid(format!("three-point atom must be positive, got a={a}")));
        }
        if !(0.0..=0.5).contains(&p) {
            return Err(invalid(format!("three-point weight p={p} leaves [0, 1/2]")));
        }
        let m2 = 2.0 * p * a * a;
        if (m2 - 1.0).abs() > STANDARDIZE_TOL {
            return Err(invalid(format!("three-point law has variance 2pa^2 = {m2}, not 1")));
        }
        let a2 = a * a;
        Ok(Self {
            kind: LawKind::ThreePoint { a, p },
            moments: [0.0, m2, 0.0, 2.0 * p * a2 * a2, 0.0, 2.0 * p * a2 * a2 * a2],
            tail_param: None,
        })
    }

    pub fn discrete(atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != weights.len() {
            return Err(invalid("discrete law needs equally many atoms and weights"));
        }
        if weights.iter().any(|w| !(0.0..=1.0).contains(w)) {
            return Err(invalid("discrete weights must lie in [0, 1]"));
        }
        if atoms.iter().any(|a| !a.is_finite()) {
            return Err(invalid("discrete atoms must be finite"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > STANDARDIZE_TOL {
            return Err(invalid(format!("discrete weights sum to {total}")));
        }
        let mut moments = [0.0; 6];
        for (k, m) in moments.iter_mut().enumerate() {
            *m = atoms.iter().zip(&weights).map(|(x, w)| w * x.powi(k as i32 + 1)).sum();
        }
        if moments[0].abs() > STANDARDIZE_TOL || (moments[1] - 1.0).abs() > STANDARDIZE_TOL {
            return Err(invalid(format!(
                "discrete law is not standardized: mean {}, variance {}",
                moments[0], moments[1]
            )));
        }
        Ok(Self {
            kind: LawKind::Discrete { atoms, weights },
            moments,
            tail_param: None,
        })
    }

    /// Raw moment `E X^k` for `k = 0..=6`.
    pub fn moment(&self, k: usize) -> f64 {
        if k == 0 {
            1.0
        } else {
            self.moments[k - 1]
        }
    }

    /// Largest `|x|` in the support, or `None` if unbounded.
    pub fn support_bound(&self) -> Option<f64> {
        match &self.kind {
            LawKind::Gaussian => None,
            LawKind::Rademacher => Some(1.0),
            LawKind::ThreePoint { a, .. } => Some(*a),
            LawKind::Discrete { atoms, weights } => Some(
                atoms
                    .iter()
                    .zip(weights)
                    .filter(|(_, w)| **w > 0.0)
                    .fold(0.0_f64, |m, (x, _)| m.max(x.abs())),
            ),
        }
    }

    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.kind {
            LawKind::Gaussian => rng.sample(StandardNormal),
            LawKind::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            LawKind::ThreePoint { a, p } => {
                let u: f64 = rng.random();
                if u < *p {
                    -a
                } else if u < 2.0 * p {
                    *a
                } else {
                    0.0
                }
            }
            LawKind::Discrete { atoms, weights } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (x, w) in atoms.iter().zip(weights) {
                    acc += w;
                    if u < acc {
                        return *x;
                    }
                }
                // rounding in the cumulative sum: fall back to the last atom with mass
                atoms
                    .iter()
                    .zip(weights)
                    .rev()
                    .find(|(_, w)| **w > 0.0)
                    .map(|(x, _)| *x)
                    .unwrap_or(0.0)
            }
        }
    }

    /// Mixed moment `E conj(h)^l h^u` of a standardized entry.
    ///
    /// For real entries this is `m_{l+u}`; for complex entries `h = (X + iY)/sqrt(2)`
    /// with `X, Y` independent copies of this law, expanded binomially.
    pub fn mixed_moment(&self, class: SymmetryClass, l: usize, u: usize) -> Complex64 {
        match class {
            SymmetryClass::RealSymmetric => Complex64::new(self.moment(l + u), 0.0),
            SymmetryClass::ComplexHermitian => {
                let i = Complex64::new(0.0, 1.0);
                let mut total = Complex64::new(0.0, 0.0);
                for a in 0..=l {
                    for b in 0..=u {
                        let coef = binomial(l, a) * binomial(u, b);
                        let xs = self.moment(a + b);
                        let ys = self.moment(l - a + u - b);
                        let phase = (-i).powu((l - a) as u32) * i.powu((u - b) as u32);
                        total += phase * (coef * xs * ys);
                    }
                }
                total / 2f64.powf((l + u) as f64 / 2.0)
            }
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, t| acc * (n - t) as f64 / (t + 1) as f64)
}

/// Builds a law from its kind, validating standardization.
pub fn make_entry_law(kind: LawKind) -> Result<EntryLaw> {
    match kind {
        LawKind::Gaussian => Ok(EntryLaw::gaussian()),
        LawKind::Rademacher => Ok(EntryLaw::rademacher()),
        LawKind::ThreePoint { a, p } => EntryLaw::three_point(a, p),
        LawKind::Discrete { atoms, weights } => EntryLaw::discrete(atoms, weights),
    }
}

/// A standardized law with third and fourth moments equal to the targets.
///
/// Symmetric targets give the symmetric three-point law (Rademacher when
/// `m4 = 1`). A nonzero third moment gives the law on `{-a, 0, b}` with
/// `a, b = (s -+ m3)/2`, `s = sqrt(4 m4 - 3 m3^2)` and weights `1/(s a)`, `1/(s b)`.
pub fn match_moments(m3: f64, m4: f64) -> Result<EntryLaw> {
    if !m3.is_finite() || !m4.is_finite() {
        return Err(invalid("target moments must be finite"));
    }
    if m4 < 1.0 + m3 * m3 - 1e-14 {
        return Err(Error::InadmissibleMoments {
            m3,
            m4,
            reason: format!(
                "a standardized law needs m4 >= 1 + m3^2 = {} (Cauchy-Schwarz on X^2 - m3 X - 1)",
                1.0 + m3 * m3
            ),
        });
    }
    if m3 == 0.0 {
        if (m4 - 1.0).abs() <= 1e-14 {
            return Ok(EntryLaw::rademacher());
        }
        let a = m4.sqrt();
        let p = 1.0 / (2.0 * m4);
        let mut law = EntryLaw::three_point(a, p)?;
        // pin the targets exactly; the closed forms agree up to rounding
        law.moments[3] = m4;
        return Ok(law);
    }
    let s = (4.0 * m4 - 3.0 * m3 * m3).sqrt();
    let a = (s - m3) / 2.0;
    let b = (s + m3) / 2.0;
    let p = 1.0 / (s * a);
    let q = 1.0 / (s * b);
    let zero = (1.0 - p - q).max(0.0);
    let (atoms, weights) = if zero > 0.0 {
        (vec![-a, 0.0, b], vec![p, zero, q])
    } else {
        (vec![-a, b], vec![p, q])
    };
    let mut law = EntryLaw::discrete(atoms, weights)?;
    law.moments[0] = 0.0;
    law.moments[1] = 1.0;
    law.moments[2] = m3;
    law.moments[3] = m4;
    Ok(law)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentComparison {
    pub l: usize,
    pub u: usize,
    pub a: Complex64,
    pub b: Complex64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentMatchReport {
    pub order: usize,
    pub matches: bool,
    pub max_abs_diff: f64,
    pub compared: Vec<MomentComparison>,
}

/// Compares all mixed moments `E conj(h)^l h^u` with `l + u <= order`.
pub fn moments_match(
    a: &EntryLaw,
    b: &EntryLaw,
    order: usize,
    class: SymmetryClass,
    tol: f64,
) -> Result<MomentMatchReport> {
    if order != 2 && order != 4 {
        return Err(invalid(format!("moment order must be 2 or 4, got {order}")));
    }
    let mut compared = Vec::new();
    let mut max_abs_diff: f64 = 0.0;
    for total in 0..=order {
        for l in 0..=total {
            let u = total - l;
            let ma = a.mixed_moment(class, l, u);
            let mb = b.mixed_moment(class, l, u);
            max_abs_diff = max_abs_diff.max((ma - mb).norm());
            compared.push(MomentComparison { l, u, a: ma, b: mb });
            if class == SymmetryClass::RealSymmetric {
                // real moments only depend on l + u
                break;
            }
        }
    }
    Ok(MomentMatchReport {
        order,
        matches: max_abs_diff <= tol,
        max_abs_diff,
        compared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::seed::{stream_rng, StreamTag};
    use proptest::prelude::*;

    fn close(a: &[f64; 6], b: &[f64; 6], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn closed_form_moments() {
        assert_eq!(EntryLaw::rademacher().moments, [0.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
        assert_eq!(EntryLaw::gaussian().moments, [0.0, 1.0, 0.0, 3.0, 0.0, 15.0]);
        let tp = EntryLaw::three_point(3f64.sqrt(), 1.0 / 6.0).unwrap();
        assert!(close(&tp.moments, &[0.0, 1.0, 0.0, 3.0, 0.0, 9.0], 1e-14));
    }

    #[test]
    fn three_point_equals_discrete_oracle() {
        let tp = EntryLaw::three_point(2.0, 0.125).unwrap();
        let d = EntryLaw::discrete(vec![-2.0, 0.0, 2.0], vec![0.125, 0.75, 0.125]).unwrap();
        assert!(close(&tp.moments, &d.moments, 1e-14));
    }

    #[test]
    fn invalid_laws_are_rejected() {
        assert!(EntryLaw::three_point(1.0, 0.25).is_err());
        assert!(EntryLaw::three_point(1.0, 0.6).is_err());
        assert!(EntryLaw::discrete(vec![-1.0, 1.0], vec![1.5, -0.5]).is_err());
        assert!(EntryLaw::discrete(vec![0.0, 1.0], vec![0.5, 0.5]).is_err());
        assert!(EntryLaw::discrete(vec![-1.0], vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn match_moments_examples() {
        let law = match_moments(0.0, 3.0).unwrap();
        match law.kind {
            LawKind::ThreePoint { a, p } => {
                assert!((a - 3f64.sqrt()).abs() < 1e-15);
                assert!((p - 1.0 / 6.0).abs() < 1e-15);
            }
            other => panic!("expected three-point law, got {other:?}"),
        }
        assert_eq!(match_moments(0.0, 1.0).unwrap().kind, LawKind::Rademacher);
        assert!(matches!(match_moments(0.0, 0.5), Err(Error::InadmissibleMoments { .. })));
        assert!(matches!(match_moments(1.0, 1.5), Err(Error::InadmissibleMoments { .. })));
    }

    #[test]
    fn moments_match_examples() {
        let g = EntryLaw::gaussian();
        let r = EntryLaw::rademacher();
        let tp = EntryLaw::three_point(3f64.sqrt(), 1.0 / 6.0).unwrap();
        for class in [SymmetryClass::RealSymmetric, SymmetryClass::ComplexHermitian] {
            assert!(moments_match(&g, &r, 2, class, 1e-12).unwrap().matches);
            assert!(!moments_match(&g, &r, 4, class, 1e-12).unwrap().matches);
            assert!(moments_match(&g, &tp, 4, class, 1e-12).unwrap().matches);
        }
        assert!(moments_match(&g, &r, 3, SymmetryClass::RealSymmetric, 1e-12).is_err());
    }

    #[test]
    fn complex_gaussian_mixed_moments() {
        // for a standard complex Gaussian, E conj(h)^l h^u = l! when l == u and 0 otherwise
        let g = EntryLaw::gaussian();
        let c = SymmetryClass::ComplexHermitian;
        assert!((g.mixed_moment(c, 1, 1) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert!((g.mixed_moment(c, 2, 2) - Complex64::new(2.0, 0.0)).norm() < 1e-14);
        assert!(g.mixed_moment(c, 0, 2).norm() < 1e-14);
        assert!(g.mixed_moment(c, 1, 3).norm() < 1e-14);
        // Rademacher parts: E|h|^4 = (m4 + 2 + m4) / 4 = 1
        let r = EntryLaw::rademacher();
        assert!((r.mixed_moment(c, 2, 2) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn complex_mixed_moments_match_monte_carlo() {
        let law = match_moments(0.4, 2.5).unwrap();
        let mut rng = stream_rng(11, 0, StreamTag::ORACLE);
        let n = 400_000;
        let mut acc = Complex64::new(0.0, 0.0);
        for _ in 0..n {
            let h = Complex64::new(law.sample(&mut rng), law.sample(&mut rng)) / 2f64.sqrt();
            acc += h.conj() * h * h;
        }
        acc /= n as f64;
        let exact = law.mixed_moment(SymmetryClass::ComplexHermitian, 1, 2);
        assert!((acc - exact).norm() < 0.02, "{acc} vs {exact}");
    }

    #[test]
    fn sample_moments_agree_with_exact_moments() {
        let laws = [
            EntryLaw::gaussian(),
            EntryLaw::rademacher(),
            EntryLaw::three_point(3f64.sqrt(), 1.0 / 6.0).unwrap(),
            match_moments(-0.7, 2.0).unwrap(),
        ];
        for (t, law) in laws.iter().enumerate() {
            let mut rng = stream_rng(3, t as u64, StreamTag::ORACLE);
            let n = 200_000;
            let mut sums = [0.0; 4];
            for _ in 0..n {
                let x = law.sample(&mut rng);
                let mut p = 1.0;
                for s in sums.iter_mut() {
                    p *= x;
                    *s += p;
                }
            }
            for k in 0..3 {
                let emp = sums[k] / n as f64;
                // 5 standard errors, using the exact 2k-th moment for the variance
                let var = law.moment(2 * (k + 1)) - law.moment(k + 1).powi(2);
                let se = (var / n as f64).sqrt();
                assert!((emp - law.moment(k + 1)).abs() < 5.0 * se + 1e-12, "law {t}, m{}", k + 1);
            }
        }
    }

    proptest! {
        #[test]
        fn matched_law_hits_targets(m3 in -2.0f64..2.0, extra in 0.0f64..5.0) {
            let m4 = 1.0 + m3 * m3 + extra;
            let law = match_moments(m3, m4).unwrap();
            // recompute the moments from the atoms, independently of the pinned values
            let (atoms, weights) = match &law.kind {
                LawKind::Discrete { atoms, weights } => (atoms.clone(), weights.clone()),
                LawKind::ThreePoint { a, p } => (vec![-a, 0.0, *a], vec![*p, 1.0 - 2.0 * p, *p]),
                LawKind::Rademacher => (vec![-1.0, 1.0], vec![0.5, 0.5]),
                LawKind::Gaussian => unreachable!(),
            };
            let mom = |k: i32| atoms.iter().zip(&weights).map(|(x, w)| w * x.powi(k)).sum::<f64>();
            prop_assert!(weights.iter().all(|w| (0.0..=1.0).contains(w)));
            prop_assert!(mom(1).abs() < 1e-10);
            prop_assert!((mom(2) - 1.0).abs() < 1e-10);
            prop_assert!((mom(3) - m3).abs() < 1e-9);
            prop_assert!((mom(4) - m4).abs() < 1e-9 * m4);
            prop_assert_eq!(law.moments[2], m3);
            prop_assert_eq!(law.moments[3], m4);
        }

        #[test]
        fn matched_law_round_trip_with_gaussian(extra in 0.0f64..1e-12) {
            let law = match_moments(0.0, 3.0 + extra).unwrap();
            let g = EntryLaw::gaussian();
            prop_assert!(moments_match(&law, &g, 4, SymmetryClass::RealSymmetric, 1e-11).unwrap().matches);
        }
    }
}
