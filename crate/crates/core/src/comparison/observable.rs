//! Joint eigenvalue / eigenvector observables and the test functions applied to them.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::semicircle::classical_location;
use crate::spectral::{Region, SpectralData};

/// An index that may depend on `N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IndexSpec {
    Absolute(usize),
    /// `N + 1 - from_top`, so `from_top = 1` is the largest index.
    FromTop { from_top: usize },
    /// `round(fraction * N)`, clamped to `[1, N]`.
    Fraction { fraction: f64 },
}

impl IndexSpec {
    pub fn resolve(&self, n: usize) -> Result<usize> {
        let k = match *self {
            IndexSpec::Absolute(k) => k,
            IndexSpec::FromTop { from_top } => (n + 1).checked_sub(from_top).unwrap_or(0),
            IndexSpec::Fraction { fraction } => {
                if !(0.0..=1.0).contains(&fraction) {
                    return Err(invalid(format!("index fraction {fraction} outside [0, 1]")));
                }
                ((fraction * n as f64).round() as usize).clamp(1, n)
            }
        };
        if k < 1 || k > n {
            return Err(Error::IndexOutOfRange(format!("index {self:?} resolves to {k}, outside [1, {n}]")));
        }
        Ok(k)
    }
}

/// Which eigenvalue indices an observable may touch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum IndexRegime {
    /// `min(alpha, N + 1 - alpha) <= max_index` for every eigenvalue index.
    Edge { max_index: usize },
    /// `rho N <= alpha <= (1 - rho) N`.
    Bulk { rho: f64 },
    Any,
}

impl Default for IndexRegime {
    fn default() -> Self {
        IndexRegime::Edge { max_index: 10 }
    }
}

impl IndexRegime {
    fn check(&self, alpha: usize, n: usize) -> Result<()> {
        let ok = match *self {
            IndexRegime::Edge { max_index } => alpha.min(n + 1 - alpha) <= max_index,
            IndexRegime::Bulk { rho } => {
                let nf = n as f64;
                alpha as f64 >= rho * nf && alpha as f64 <= (1.0 - rho) * nf
            }
            IndexRegime::Any => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange(format!("eigenvalue index {alpha} violates the {self:?} condition at N = {n}")))
        }
    }
}

/// Smooth maps from the observable vector to a real number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    Sum,
    Product,
    /// `exp(-|x|^2 / (2 scale^2))`.
    Bump { scale: f64 },
}

impl Default for TestFunction {
    fn default() -> Self {
        TestFunction::Sum
    }
}

impl TestFunction {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            TestFunction::Sum => x.iter().sum(),
            TestFunction::Product => x.iter().product(),
            TestFunction::Bump { scale } => (-x.iter().map(|v| v * v).sum::<f64>() / (2.0 * scale * scale)).exp(),
        }
    }

    /// Polynomial degree `d` with `|D^k theta(x)| <= C (1 + |x|)^d`.
    pub fn growth_degree(&self, arity: usize) -> usize {
        match self {
            TestFunction::Sum => 1,
            TestFunction::Product => arity,
            TestFunction::Bump { .. } => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenvectorTerm {
    pub alpha: IndexSpec,
    pub i: IndexSpec,
    pub j: IndexSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueTerm {
    pub beta: IndexSpec,
    pub region: Region,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableSpec {
    #[serde(default)]
    pub eigenvector_terms: Vec<EigenvectorTerm>,
    #[serde(default)]
    pub eigenvalue_terms: Vec<EigenvalueTerm>,
    #[serde(default)]
    pub test_function: TestFunction,
    #[serde(default)]
    pub regime: IndexRegime,
}

impl ObservableSpec {
    /// `N |u_alpha(i)|^2`.
    pub fn overlap(alpha: IndexSpec, i: usize, regime: IndexRegime) -> Self {
        Self {
            eigenvector_terms: vec![EigenvectorTerm {
                alpha,
                i: IndexSpec::Absolute(i),
                j: IndexSpec::Absolute(i),
            }],
            eigenvalue_terms: Vec::new(),
            test_function: TestFunction::Sum,
            regime,
        }
    }

    pub fn resolve(&self, n: usize) -> Result<ResolvedObservable> {
        if self.eigenvector_terms.is_empty() && self.eigenvalue_terms.is_empty() {
            return Err(invalid("observable has no terms"));
        }
        if let TestFunction::Bump { scale } = self.test_function {
            if !(scale > 0.0) {
                return Err(invalid("bump scale must be positive"));
            }
        }
        let mut vectors = Vec::new();
        for t in &self.eigenvector_terms {
            let (a, i, j) = (t.alpha.resolve(n)?, t.i.resolve(n)?, t.j.resolve(n)?);
            self.regime.check(a, n)?;
            vectors.push((a, i, j));
        }
        let mut values = Vec::new();
        for t in &self.eigenvalue_terms {
            let b = t.beta.resolve(n)?;
            self.regime.check(b, n)?;
            values.push((b, t.region, classical_location(b, n)?));
        }
        Ok(ResolvedObservable {
            n,
            vectors,
            values,
            test_function: self.test_function,
        })
    }
}

/// An observable with all indices fixed for one `N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedObservable {
    pub n: usize,
    /// `(alpha, i, j)`, 1-based.
    pub vectors: Vec<(usize, usize, usize)>,
    /// `(beta, region, gamma_beta)`.
    pub values: Vec<(usize, Region, f64)>,
    pub test_function: TestFunction,
}

impl ResolvedObservable {
    pub fn labels(&self) -> Vec<String> {
        let mut out: Vec<String> = self.vectors.iter().map(|(a, i, j)| format!("N*u{a}({i})u{a}({j})")).collect();
        out.extend(self.values.iter().map(|(b, r, _)| match r {
            Region::Edge => format!("N^(2/3)*(lambda{b}-gamma{b})"),
            Region::Bulk => format!("N*(lambda{b}-gamma{b})"),
        }));
        out
    }

    /// Eigenvalue indices whose eigenvectors enter; their eigenvalues must be simple.
    pub fn vector_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.vectors.iter().map(|v| v.0)
    }

    /// The scalar values in label order. Eigenvector terms contribute the real part
    /// of `N conj(u_alpha(i)) u_alpha(j)`, which is the full value when `i = j`.
    pub fn components(&self, sd: &SpectralData) -> Vec<f64> {
        let nf = self.n as f64;
        let mut out: Vec<f64> = self
            .vectors
            .iter()
            .map(|&(a, i, j)| nf * (sd.component(a, i).conj() * sd.component(a, j)).re)
            .collect();
        out.extend(self.values.iter().map(|&(b, r, g)| r.scale(self.n) * (sd.lambda[b - 1] - g)));
        out
    }

    pub fn theta(&self, components: &[f64]) -> f64 {
        self.test_function.eval(components)
    }
}
