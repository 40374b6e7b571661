//! Variance profiles, entry laws and reproducible sampling of generalized Wigner
//! matrices.

mod law;
mod profile;
mod sample;
mod tail;

pub use law::{
    make_entry_law, match_moments, moments_match, EntryLaw, LawKind, MomentComparison, MomentMatchReport,
};
pub use profile::{make_variance_profile, validate_profile, ProfileKind, ProfileReport, VarianceProfile};
pub use sample::{
    assemble, draw_entries, draw_entry, gamma_max, phi, phi_inverse, sample_matrix, summarize, HermitianMatrix,
    MatrixSample, SampleSummary,
};
pub(crate) use sample::assemble_with;
pub use tail::{tail_check, tail_check_on, TailPoint, TailReport, DEFAULT_TAIL_GRID};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryClass {
    RealSymmetric,
    ComplexHermitian,
}

/// Everything needed to draw matrices of one ensemble at one size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub symmetry: SymmetryClass,
    pub profile: VarianceProfile,
    pub off_diagonal_law: EntryLaw,
    pub diagonal_law: EntryLaw,
    /// Free-form label used in reports.
    pub name: String,
}

impl EnsembleSpec {
    pub fn new(
        symmetry: SymmetryClass,
        profile: VarianceProfile,
        off_diagonal_law: EntryLaw,
        diagonal_law: EntryLaw,
    ) -> Result<Self> {
        for (what, law) in [("off-diagonal", &off_diagonal_law), ("diagonal", &diagonal_law)] {
            if law.moments[0].abs() > 1e-12 || (law.moments[1] - 1.0).abs() > 1e-12 {
                return Err(invalid(format!("{what} law is not standardized")));
            }
        }
        Ok(Self {
            symmetry,
            profile,
            off_diagonal_law,
            diagonal_law,
            name: String::from("custom"),
        })
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn n(&self) -> usize {
        self.profile.n
    }

    /// Wigner profile with the same law on and off the diagonal.
    pub fn wigner(n: usize, symmetry: SymmetryClass, law: EntryLaw) -> Result<Self> {
        Self::new(symmetry, VarianceProfile::wigner(n)?, law.clone(), law)
    }

    /// Complex Hermitian Gaussian ensemble with all variances `1/N`. This coincides
    /// with the textbook GUE normalized to spectrum `[-2, 2]`.
    pub fn gue(n: usize) -> Result<Self> {
        Ok(Self::wigner(n, SymmetryClass::ComplexHermitian, EntryLaw::gaussian())?.named("gue"))
    }

    /// Real symmetric Gaussian ensemble consistent with unit row sums: the diagonal
    /// has variance `1/N`, not the textbook `2/N`.
    pub fn goe(n: usize) -> Result<Self> {
        Ok(Self::wigner(n, SymmetryClass::RealSymmetric, EntryLaw::gaussian())?.named("goe"))
    }

    /// Textbook GOE with diagonal variance `2/N`. Its profile violates unit row sums
    /// and is meant only for cross-checks.
    pub fn goe_textbook(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(invalid(format!("profile needs N >= 2, got {n}")));
        }
        let v = 1.0 / n as f64;
        let sigma2 = (0..n * n).map(|k| if k / n == k % n { 2.0 * v } else { v }).collect();
        let profile = VarianceProfile::custom(n, sigma2)?;
        Ok(Self::new(SymmetryClass::RealSymmetric, profile, EntryLaw::gaussian(), EntryLaw::gaussian())?
            .named("goe_textbook"))
    }

    pub fn gue_textbook(n: usize) -> Result<Self> {
        Ok(Self::gue(n)?.named("gue_textbook"))
    }
}

/// Size-independent description of an ensemble, as read from configuration files.
///
/// ```toml
/// symmetry = "complex_hermitian"   # or "real_symmetric"
/// profile = "wigner"                # "band" needs band_width, "goe_textbook"
/// law = "three_point"               # gaussian | rademacher | three_point | discrete | matched
/// a = 1.7320508075688772
/// p = 0.16666666666666666
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub symmetry: SymmetryClass,
    #[serde(default = "default_profile")]
    pub profile: String,
    #[serde(default)]
    pub band_width: Option<f64>,
    pub law: String,
    #[serde(default)]
    pub a: Option<f64>,
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default)]
    pub atoms: Option<Vec<f64>>,
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    #[serde(default)]
    pub m3: Option<f64>,
    #[serde(default)]
    pub m4: Option<f64>,
    /// Law for the diagonal; defaults to the off-diagonal law.
    #[serde(default)]
    pub diagonal_law: Option<String>,
    /// Optional upper bound on `N * max sigma2`.
    #[serde(default)]
    pub c0: Option<f64>,
    #[serde(default)]
    pub name: Option<String>,
}

fn default_profile() -> String {
    "wigner".into()
}

impl EnsembleConfig {
    pub fn simple(symmetry: SymmetryClass, law: &str) -> Self {
        Self {
            symmetry,
            profile: default_profile(),
            band_width: None,
            law: law.into(),
            a: None,
            p: None,
            atoms: None,
            weights: None,
            m3: None,
            m4: None,
            diagonal_law: None,
            c0: None,
            name: None,
        }
    }

    fn law_named(&self, name: &str) -> Result<EntryLaw> {
        let need = |v: Option<f64>, key: &str| v.ok_or_else(|| Error::Config(format!("law '{name}' needs '{key}'")));
        match name {
            "gaussian" => Ok(EntryLaw::gaussian()),
            "rademacher" => Ok(EntryLaw::rademacher()),
            "three_point" => EntryLaw::three_point(need(self.a, "a")?, need(self.p, "p")?),
            "discrete" => EntryLaw::discrete(
                self.atoms.clone().ok_or_else(|| Error::Config("discrete law needs 'atoms'".into()))?,
                self.weights.clone().ok_or_else(|| Error::Config("discrete law needs 'weights'".into()))?,
            ),
            "matched" => match_moments(self.m3.unwrap_or(0.0), need(self.m4, "m4")?),
            other => Err(Error::Config(format!("unknown law '{other}'"))),
        }
    }

    pub fn build(&self, n: usize) -> Result<EnsembleSpec> {
        if self.profile == "goe_textbook" {
            return EnsembleSpec::goe_textbook(n);
        }
        let profile = match self.profile.as_str() {
            "wigner" => VarianceProfile::wigner(n)?,
            "band" => VarianceProfile::band(
                n,
                self.band_width
                    .ok_or_else(|| Error::Config("band profile needs 'band_width'".into()))?,
            )?,
            other => return Err(Error::Config(format!("unknown profile '{other}'"))),
        };
        if let Some(c0) = self.c0 {
            if profile.c0 > c0 * (1.0 + 1e-12) {
                return Err(Error::Config(format!("profile has C0 = {} above the configured {c0}", profile.c0)));
            }
        }
        let off = self.law_named(&self.law)?;
        let diag = match &self.diagonal_law {
            Some(d) => self.law_named(d)?,
            None => off.clone(),
        };
        let name = self.name.clone().unwrap_or_else(|| format!("{}-{}", self.law, self.profile));
        Ok(EnsembleSpec::new(self.symmetry, profile, off, diag)?.named(name))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip() {
        let text = r#"
            symmetry = "complex_hermitian"
            law = "three_point"
            a = 1.7320508075688772
            p = 0.16666666666666666
        "#;
        let cfg: EnsembleConfig = toml::from_str(text).unwrap();
        let spec = cfg.build(10).unwrap();
        assert_eq!(spec.symmetry, SymmetryClass::ComplexHermitian);
        assert!(matches!(spec.off_diagonal_law.kind, LawKind::ThreePoint { .. }));
        let back: EnsembleConfig = toml::from_str(&toml::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn config_errors() {
        let mut cfg = EnsembleConfig::simple(SymmetryClass::RealSymmetric, "three_point");
        assert!(matches!(cfg.build(10), Err(Error::Config(_))));
        cfg.law = "cauchy".into();
        assert!(cfg.build(10).is_err());
        cfg.law = "gaussian".into();
        cfg.profile = "band".into();
        assert!(cfg.build(10).is_err());
        cfg.band_width = Some(0.5);
        assert!(cfg.build(10).is_ok());
        cfg.c0 = Some(1.0);
        assert!(cfg.build(10).is_err());
        assert!(toml::from_str::<EnsembleConfig>("symmetry = \"real_symmetric\"\nlaw = \"gaussian\"\nbogus = 1").is_err());
    }

    #[test]
    fn textbook_goe_is_flagged() {
        let spec = EnsembleSpec::goe_textbook(10).unwrap();
        assert!((spec.profile.get(0, 0) - 0.2).abs() < 1e-15);
        let r = validate_profile(&spec.profile).unwrap();
        assert!(!r.ok());
        assert!(validate_profile(&EnsembleSpec::goe(10).unwrap().profile).unwrap().ok());
    }
}
