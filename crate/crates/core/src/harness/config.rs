//! Experiment configuration: a TOML file, then `WIGNERLAB_*` environment variables,
//! then command-line flags, each layer overriding the previous one.
//!
//! ```toml
//! experiment = "compare"
//! sizes = [100, 200, 400]
//! trials = 2000
//! seed = 7
//! parallelism = 0
//!
//! [knobs]
//! log_power = 2.0
//! ks_threshold = 0.08
//!
//! [ensemble]
//! symmetry = "real_symmetric"
//! law = "gaussian"
//!
//! [ensemble_w]
//! symmetry = "real_symmetric"
//! law = "rademacher"
//!
//! [observable]
//! eigenvector_terms = [{ alpha = 1, i = 1, j = 1 }]
//!
//! [output]
//! json = "report.json"
//! csv = "samples.csv"
//! ```
//!
//! Every key except `experiment` has a default; see [`Knobs`] for the tunables and
//! their admissible ranges.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::comparison::{IndexRegime, IndexSpec, ObservableSpec, SmoothFunction};
use crate::ensembles::{EnsembleConfig, SymmetryClass};
use crate::error::{Error, Result};
use crate::resolvent::ReconstructionParams;
use crate::spectral::Region;

pub const ENV_PREFIX: &str = "WIGNERLAB_";

/// Largest matrix size accepted from configuration.
pub const MAX_N: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Sample,
    Locallaw,
    Rigidity,
    Deloc,
    Repulsion,
    Reconstruct,
    Compare,
    Gfct,
    HsCheck,
    Selftest,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 10] = [
        ExperimentKind::Sample,
        ExperimentKind::Locallaw,
        ExperimentKind::Rigidity,
        ExperimentKind::Deloc,
        ExperimentKind::Repulsion,
        ExperimentKind::Reconstruct,
        ExperimentKind::Compare,
        ExperimentKind::Gfct,
        ExperimentKind::HsCheck,
        ExperimentKind::Selftest,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Sample => "sample",
            ExperimentKind::Locallaw => "locallaw",
            ExperimentKind::Rigidity => "rigidity",
            ExperimentKind::Deloc => "deloc",
            ExperimentKind::Repulsion => "repulsion",
            ExperimentKind::Reconstruct => "reconstruct",
            ExperimentKind::Compare => "compare",
            ExperimentKind::Gfct => "gfct",
            ExperimentKind::HsCheck => "hs-check",
            ExperimentKind::Selftest => "selftest",
        }
    }

    fn needs_second_ensemble(&self) -> bool {
        matches!(self, ExperimentKind::Compare | ExperimentKind::Gfct)
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment '{s}'")))
    }
}

/// Numerical tunables. Ranges are enforced by [`ExperimentConfig::validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Knobs {
    /// Scale exponent of the counting sandwich, the sharp-vs-smooth gap and the
    /// edge counting statistic; in `(0, 1]`.
    pub eps: f64,
    /// Power `p` of the `(log N)^p` stand-in used by the audits; in `[0, 10]`.
    pub log_power: f64,
    /// Power `L` of the edge window `-2 +- (log N)^L N^{-2/3}`; in `[0, 10]`.
    pub edge_log_power: f64,
    /// Constant `C` of the sharp-vs-smooth bound; positive.
    pub gap_constant: f64,
    /// Points per edge window for the counting checks; in `[1, 1000]`.
    pub edge_points: usize,
    /// Repulsion window exponent `a`; in `(0, 1]`.
    pub alpha_exp: f64,
    pub region: Region,
    /// Energies for the repulsion grid; empty means `gamma_1` (edge) or `0` (bulk).
    pub energies: Vec<f64>,
    /// Eigenvalue index and component pair of the reconstructed overlap, 1-based.
    pub alpha: usize,
    pub i: usize,
    pub j: usize,
    /// Scale exponent of the overlap reconstruction; in `(0, 10]`.
    pub reconstruct_eps: f64,
    /// Log powers of the reconstruction shift and window; in `[-20, 20]`.
    pub shift_log_power: f64,
    pub window_log_power: f64,
    /// Also run the smoothed-weight reconstruction.
    pub smoothed: bool,
    /// Counting window of `gfct` as `[s1, s2]`, meaning `E = -2 + s N^{-2/3}`.
    pub gfct_window: [f64; 2],
    /// `|difference| <= gfct_factor * N^{-1/6}` or the interval covers zero.
    pub gfct_factor: f64,
    /// Indicator interval of `hs-check`; inside `[-3, 3]`.
    pub hs_interval: [f64; 2],
    /// Ramp width of the indicator; in `(1e-5, 1]`.
    pub eta_d: f64,
    pub chi_half_width: f64,
    /// Absolute tolerance on the trace; in `[1e-7, 1]`. Cost grows quickly below that.
    pub quad_tol: f64,
    pub hs_tolerance: f64,
    /// Bootstrap resamples, at least 200.
    pub resamples: usize,
    /// Confidence level in `(0.5, 1)`.
    pub level: f64,
    pub max_skip_fraction: f64,
    /// Minimum audit pass rate.
    pub pass_rate: f64,
    pub ks_threshold: f64,
    /// Largest accepted median relative reconstruction error.
    pub median_tolerance: f64,
}

impl Default for Knobs {
    fn default() -> Self {
        let r = ReconstructionParams::default();
        Self {
            eps: 0.05,
            log_power: 2.0,
            edge_log_power: 1.0,
            gap_constant: 10.0,
            edge_points: 9,
            alpha_exp: 0.1,
            region: Region::Edge,
            energies: Vec::new(),
            alpha: 1,
            i: 1,
            j: 1,
            reconstruct_eps: r.eps,
            shift_log_power: r.c1_power,
            window_log_power: r.c2_power,
            smoothed: false,
            gfct_window: [-1.0, 1.0],
            gfct_factor: 5.0,
            hs_interval: [-1.0, 0.0],
            eta_d: 1e-3,
            chi_half_width: 1.0,
            quad_tol: 1e-4,
            hs_tolerance: 1e-3,
            resamples: 1000,
            level: 0.95,
            max_skip_fraction: 0.05,
            pass_rate: 0.99,
            ks_threshold: 0.08,
            median_tolerance: 0.05,
        }
    }
}

impl Knobs {
    pub fn reconstruction(&self) -> ReconstructionParams {
        ReconstructionParams {
            eps: self.reconstruct_eps,
            c1_power: self.shift_log_power,
            c2_power: self.window_log_power,
            edge_log_power: self.edge_log_power,
        }
    }

    fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        let mut range = |name: &str, v: f64, lo: f64, hi: f64, open_lo: bool| {
            let ok = v.is_finite() && v <= hi && if open_lo { v > lo } else { v >= lo };
            if !ok {
                let l = if open_lo { "(" } else { "[" };
                bad.push(format!("{name} = {v} outside {l}{lo}, {hi}]"));
            }
        };
        range("eps", self.eps, 0.0, 1.0, true);
        range("log_power", self.log_power, 0.0, 10.0, false);
        range("edge_log_power", self.edge_log_power, 0.0, 10.0, false);
        range("gap_constant", self.gap_constant, 0.0, 1e12, true);
        range("edge_points", self.edge_points as f64, 1.0, 1000.0, false);
        range("alpha_exp", self.alpha_exp, 0.0, 1.0, true);
        range("reconstruct_eps", self.reconstruct_eps, 0.0, 10.0, true);
        range("shift_log_power", self.shift_log_power, -20.0, 20.0, false);
        range("window_log_power", self.window_log_power, -20.0, 20.0, false);
        range("gfct_window[0]", self.gfct_window[0], -1e6, self.gfct_window[1], false);
        range("gfct_window[1]", self.gfct_window[1], -1e6, 1e6, false);
        range("gfct_factor", self.gfct_factor, 0.0, 1e12, true);
        range("hs_interval[0]", self.hs_interval[0], -3.0, self.hs_interval[1], false);
        range("hs_interval[1]", self.hs_interval[1], -3.0, 3.0, false);
        range("eta_d", self.eta_d, 1e-5, 1.0, true);
        range("chi_half_width", self.chi_half_width, 0.0, 10.0, true);
        range("quad_tol", self.quad_tol, 1e-7, 1.0, false);
        range("hs_tolerance", self.hs_tolerance, 0.0, 1e12, true);
        range("resamples", self.resamples as f64, 200.0, 1e7, false);
        range("level", self.level, 0.5, 1.0 - 1e-12, true);
        range("max_skip_fraction", self.max_skip_fraction, 0.0, 1.0, false);
        range("pass_rate", self.pass_rate, 0.0, 1.0, false);
        range("ks_threshold", self.ks_threshold, 0.0, 1.0, true);
        range("median_tolerance", self.median_tolerance, 0.0, 1e12, true);
        for (k, e) in self.energies.iter().enumerate() {
            range(&format!("energies[{k}]"), *e, -5.0, 5.0, false);
        }
        for (name, v) in [("alpha", self.alpha), ("i", self.i), ("j", self.j)] {
            if v == 0 {
                bad.push(format!("{name} is 1-based and must be at least 1"));
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(bad.join("; ")))
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputPaths {
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_sizes")]
    pub sizes: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[serde(default)]
    pub parallelism: usize,
    #[serde(default)]
    pub knobs: Knobs,
    #[serde(default = "default_ensemble")]
    pub ensemble: EnsembleConfig,
    /// Second ensemble of `compare` and `gfct`.
    #[serde(default)]
    pub ensemble_w: Option<EnsembleConfig>,
    /// Observable of `compare`; defaults to `N |u_1(1)|^2`.
    #[serde(default)]
    pub observable: Option<ObservableSpec>,
    /// Test function of `gfct`.
    #[serde(default = "default_function")]
    pub function: SmoothFunction,
    /// Output locations are not part of the experiment and stay out of the report.
    #[serde(default, skip_serializing)]
    pub output: OutputPaths,
}

fn default_sizes() -> Vec<usize> {
    vec![200]
}

fn default_trials() -> usize {
    20
}

fn default_ensemble() -> EnsembleConfig {
    EnsembleConfig::simple(SymmetryClass::ComplexHermitian, "gaussian")
}

fn default_function() -> SmoothFunction {
    SmoothFunction::Tanh { scale: 1.0 }
}

impl ExperimentConfig {
    /// Defaults for `kind`. `compare` and `gfct` contrast real Gaussian and
    /// Rademacher entries; everything else samples GUE.
    pub fn defaults(kind: ExperimentKind) -> Self {
        let mut cfg = Self {
            experiment: kind,
            sizes: default_sizes(),
            trials: default_trials(),
            seed: 0,
            parallelism: 0,
            knobs: Knobs::default(),
            ensemble: default_ensemble(),
            ensemble_w: None,
            observable: None,
            function: default_function(),
            output: OutputPaths::default(),
        };
        if kind.needs_second_ensemble() {
            cfg.ensemble = EnsembleConfig::simple(SymmetryClass::RealSymmetric, "gaussian");
            cfg.ensemble_w = Some(EnsembleConfig::simple(SymmetryClass::RealSymmetric, "rademacher"));
        }
        cfg
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a file; its `experiment` key may be omitted when `kind` is given, and
    /// must agree with `kind` otherwise.
    pub fn from_file(path: &Path, kind: Option<ExperimentKind>) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut value: toml::Table =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        match (value.get("experiment"), kind) {
            (None, Some(k)) => {
                value.insert("experiment".into(), toml::Value::String(k.as_str().into()));
            }
            (Some(v), Some(k)) if v.as_str() != Some(k.as_str()) => {
                return Err(Error::Config(format!(
                    "{} is a config for '{}', not '{k}'",
                    path.display(),
                    v.as_str().unwrap_or("?")
                )));
            }
            _ => {}
        }
        let mut cfg: Self = value
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(format!("{}: {e}", path.display())))?;
        if cfg.experiment.needs_second_ensemble() && cfg.ensemble_w.is_none() {
            return Err(Error::Config(format!("{} needs an [ensemble_w] section", cfg.experiment)));
        }
        if cfg.experiment == ExperimentKind::Compare && cfg.observable.is_none() {
            cfg.observable = Some(cfg.default_observable());
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(s) = &o.sizes {
            self.sizes = s.clone();
        }
        if let Some(t) = o.trials {
            self.trials = t;
        }
        if let Some(p) = o.parallelism {
            self.parallelism = p;
        }
        if let Some(p) = &o.out {
            self.output.json = Some(p.clone());
        }
        if let Some(p) = &o.csv {
            self.output.csv = Some(p.clone());
        }
    }

    pub fn default_observable(&self) -> ObservableSpec {
        ObservableSpec::overlap(IndexSpec::Absolute(1), 1, IndexRegime::default())
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.sizes.is_empty() {
            return Err(Error::Config("the size list is empty".into()));
        }
        if let Some(&n) = self.sizes.iter().find(|&&n| !(2..=MAX_N).contains(&n)) {
            return Err(Error::Config(format!("N = {n} outside [2, {MAX_N}]")));
        }
        if self.parallelism > 4096 {
            return Err(Error::Config(format!("parallelism {} is not plausible", self.parallelism)));
        }
        if let SmoothFunction::Tanh { scale } | SmoothFunction::Gaussian { scale } = self.function {
            if !(scale > 0.0 && scale.is_finite()) {
                return Err(Error::Config(format!("test function scale must be positive, got {scale}")));
            }
        }
        self.knobs.validate()?;
        for &n in &self.sizes {
            self.ensemble.build(n).map_err(as_config)?;
            if let Some(w) = &self.ensemble_w {
                let w = w.build(n).map_err(as_config)?;
                if w.symmetry != self.ensemble.symmetry {
                    return Err(Error::Config("both ensembles must share the symmetry class".into()));
                }
            }
            if self.experiment == ExperimentKind::Compare {
                self.observable
                    .clone()
                    .unwrap_or_else(|| self.default_observable())
                    .resolve(n)
                    .map_err(as_config)?;
            }
            if self.experiment == ExperimentKind::Gfct {
                let reach = (n as f64).powf(self.knobs.eps);
                if self.knobs.gfct_window.iter().any(|s| s.abs() > reach) {
                    return Err(Error::Config(format!(
                        "gfct_window {:?} leaves |s| <= N^eps = {reach} at N = {n}",
                        self.knobs.gfct_window
                    )));
                }
            }
            if self.experiment == ExperimentKind::Reconstruct {
                if let Some(k) = [self.knobs.alpha, self.knobs.i, self.knobs.j].into_iter().find(|&k| k > n) {
                    return Err(Error::Config(format!("index {k} exceeds N = {n}")));
                }
            }
        }
        if self.experiment.needs_second_ensemble() && self.ensemble_w.is_none() {
            return Err(Error::Config(format!("{} needs a second ensemble", self.experiment)));
        }
        Ok(())
    }
}

fn as_config(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

/// Values that may come from the environment or from flags.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub sizes: Option<Vec<usize>>,
    pub trials: Option<usize>,
    pub parallelism: Option<usize>,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

impl Overrides {
    /// Reads `WIGNERLAB_SEED`, `WIGNERLAB_N` (comma separated), `WIGNERLAB_TRIALS`,
    /// `WIGNERLAB_PARALLELISM`, `WIGNERLAB_OUT` and `WIGNERLAB_CSV` through `lookup`.
    pub fn from_env_with(lookup: impl Fn(&str) -> Option<String>) -> Result<Self> {
        let get = |key: &str| lookup(&format!("{ENV_PREFIX}{key}")).filter(|v| !v.trim().is_empty());
        let num = |key: &str| -> Result<Option<u64>> {
            get(key)
                .map(|v| {
                    v.trim()
                        .parse::<u64>()
                        .map_err(|e| Error::Config(format!("{ENV_PREFIX}{key} = '{v}': {e}")))
                })
                .transpose()
        };
        Ok(Self {
            seed: num("SEED")?,
            sizes: get("N").map(|v| parse_sizes(&v)).transpose()?,
            trials: num("TRIALS")?.map(|v| v as usize),
            parallelism: num("PARALLELISM")?.map(|v| v as usize),
            out: get("OUT").map(PathBuf::from),
            csv: get("CSV").map(PathBuf::from),
        })
    }

    pub fn from_env() -> Result<Self> {
        Self::from_env_with(|k| std::env::var(k).ok())
    }
}

/// Parses `"100,200, 400"`.
pub fn parse_sizes(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|e| Error::Config(format!("bad size '{}': {e}", s.trim())))
        })
        .collect()
}

/// File, then environment, then flags.
pub fn resolve_config(
    kind: ExperimentKind,
    file: Option<&Path>,
    env: &Overrides,
    flags: &Overrides,
) -> Result<ExperimentConfig> {
    let mut cfg = match file {
        Some(p) => ExperimentConfig::from_file(p, Some(kind))?,
        None => ExperimentConfig::defaults(kind),
    };
    cfg.apply(env);
    cfg.apply(flags);
    cfg.validate()?;
    Ok(cfg)
}
