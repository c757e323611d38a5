//! Experiment configuration files.
//!
//! Configs are TOML. A complete area-law example:
//!
//! ```toml
//! kind = "arealaw"          # arealaw | correlator | verify
//! master_seed = 20240611
//! realizations = 100
//! n_values = [100]
//! output_dir = "out/arealaw"
//!
//! [ensemble]
//! mu = 1.0                  # a number is a constant coupling
//! gamma = 0.0
//! nu = [0.0, 5.0]           # a pair [lo, hi] is Uniform(lo, hi)
//! bound = 100.0             # optional, per-site bound on |μ|+|γ|+|ν|
//!
//! [subintervals]
//! policy = "centered"       # centered | left_edge | explicit
//! ell = [2, 5, 10, 25, 50]
//! # r = 3                   # explicit policy only: one-based first site
//!
//! [alpha]
//! strategy = "sample"       # sample | exhaustive
//! count = 512
//! limit = 4096
//!
//! [control]                 # optional clean-chain ground-state control
//! mu = 1.0
//! nu = 0.1
//! ```
//!
//! Correlator runs may add `[correlator]` with `fit_min` / `fit_max`; verify
//! runs may add `[verify]` with `wick_tuples` and `inject_w_fault`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use xychain_core::freefermion::{SearchStrategy, SubInterval, DEFAULT_EXHAUSTIVE_LIMIT};
use xychain_core::model::{CouplingSpec, DisorderEnsemble, DEFAULT_COUPLING_BOUND};
use xychain_core::oracle::ORACLE_CAP;

use crate::error::{AppError, AppResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Arealaw,
    Correlator,
    Verify,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Arealaw => "arealaw",
            ExperimentKind::Correlator => "correlator",
            ExperimentKind::Verify => "verify",
        }
    }
}

/// A coupling written either as a number or as `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CouplingValue {
    Constant(f64),
    Uniform([f64; 2]),
}

impl From<CouplingValue> for CouplingSpec {
    fn from(v: CouplingValue) -> Self {
        match v {
            CouplingValue::Constant(x) => CouplingSpec::Constant(x),
            CouplingValue::Uniform([lo, hi]) => CouplingSpec::Uniform { lo, hi },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub mu: CouplingValue,
    #[serde(default = "zero_coupling")]
    pub gamma: CouplingValue,
    pub nu: CouplingValue,
    #[serde(default = "default_bound")]
    pub bound: f64,
}

fn zero_coupling() -> CouplingValue {
    CouplingValue::Constant(0.0)
}

fn default_bound() -> f64 {
    DEFAULT_COUPLING_BOUND
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubintervalPolicy {
    #[default]
    Centered,
    LeftEdge,
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubintervalConfig {
    #[serde(default)]
    pub policy: SubintervalPolicy,
    #[serde(default)]
    pub ell: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphaStrategy {
    #[default]
    Sample,
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaConfig {
    #[serde(default)]
    pub strategy: AlphaStrategy,
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default = "default_limit")]
    pub limit: usize,
}

fn default_count() -> usize {
    512
}

fn default_limit() -> usize {
    DEFAULT_EXHAUSTIVE_LIMIT
}

impl Default for AlphaConfig {
    fn default() -> Self {
        AlphaConfig {
            strategy: AlphaStrategy::Sample,
            count: default_count(),
            limit: default_limit(),
        }
    }
}

/// Clean isotropic chain whose ground-state entropy is reported next to the
/// disordered curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlConfig {
    #[serde(default = "one")]
    pub mu: f64,
    pub nu: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelatorConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_min: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_max: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "default_wick_tuples")]
    pub wick_tuples: usize,
    /// Flip the sign of one entry of W before checking it (fault injection).
    #[serde(default)]
    pub inject_w_fault: bool,
}

fn default_wick_tuples() -> usize {
    100
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            wick_tuples: default_wick_tuples(),
            inject_w_fault: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub master_seed: u64,
    pub realizations: usize,
    pub n_values: Vec<usize>,
    pub output_dir: PathBuf,
    pub ensemble: EnsembleConfig,
    #[serde(default)]
    pub subintervals: SubintervalConfig,
    #[serde(default)]
    pub alpha: AlphaConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control: Option<ControlConfig>,
    #[serde(default)]
    pub correlator: CorrelatorConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load(path: &Path) -> AppResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| AppError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let config = Self::from_toml(&text).map_err(|source| AppError::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        config.validate()?;
        Ok(config)
    }

    /// Canonical TOML rendering, used for hashing and for the manifest.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub fn ensemble(&self) -> AppResult<DisorderEnsemble> {
        let e = &self.ensemble;
        DisorderEnsemble::new(e.mu.into(), e.gamma.into(), e.nu.into(), self.master_seed)
            .and_then(|ens| ens.with_bound(e.bound))
            .map_err(|err| AppError::Config(err.to_string()))
    }

    pub fn search_strategy(&self, seed: u64) -> SearchStrategy {
        match self.alpha.strategy {
            AlphaStrategy::Sample => SearchStrategy::Sample {
                count: self.alpha.count,
                seed,
            },
            AlphaStrategy::Exhaustive => SearchStrategy::Exhaustive {
                limit: self.alpha.limit,
            },
        }
    }

    /// Subchains for a chain of `n` sites under the configured policy.
    pub fn subintervals(&self, n: usize) -> AppResult<Vec<SubInterval>> {
        let s = &self.subintervals;
        let to_config = |e: xychain_core::Error| AppError::Config(e.to_string());
        match s.policy {
            SubintervalPolicy::Centered => s
                .ell
                .iter()
                .map(|&l| SubInterval::centered(l, n).map_err(to_config))
                .collect(),
            SubintervalPolicy::LeftEdge => s
                .ell
                .iter()
                .map(|&l| SubInterval::left_edge(l, n).map_err(to_config))
                .collect(),
            SubintervalPolicy::Explicit => {
                let r = s.r.ok_or_else(|| {
                    AppError::Config("explicit subinterval policy needs r".into())
                })?;
                s.ell
                    .iter()
                    .map(|&l| SubInterval::from_one_based(r, l, n).map_err(to_config))
                    .collect()
            }
        }
    }

    pub fn validate(&self) -> AppResult<()> {
        let err = |m: String| Err(AppError::Config(m));
        if self.realizations == 0 {
            return err("realizations must be >= 1".into());
        }
        if self.n_values.is_empty() {
            return err("n_values must not be empty".into());
        }
        if let Some(&bad) = self.n_values.iter().find(|&&n| n == 0) {
            return err(format!("chain length {bad} must be >= 1"));
        }
        self.ensemble()?;
        match self.kind {
            ExperimentKind::Arealaw => {
                if self.subintervals.ell.is_empty() {
                    return err("arealaw needs [subintervals] ell".into());
                }
                if self.subintervals.ell.contains(&0) {
                    return err("subinterval lengths must be >= 1".into());
                }
                if self.alpha.strategy == AlphaStrategy::Sample && self.alpha.count == 0 {
                    return err("alpha count must be >= 1".into());
                }
                for &n in &self.n_values {
                    self.subintervals(n)?;
                }
                if let Some(c) = &self.control {
                    if !(c.mu.is_finite() && c.nu.is_finite()) {
                        return err("control couplings must be finite".into());
                    }
                }
            }
            ExperimentKind::Correlator => {
                if let (Some(lo), Some(hi)) = (self.correlator.fit_min, self.correlator.fit_max) {
                    if lo > hi {
                        return err(format!("fit window [{lo}, {hi}] is empty"));
                    }
                }
            }
            ExperimentKind::Verify => {
                if let Some(&n) = self.n_values.iter().find(|&&n| n > ORACLE_CAP) {
                    return err(format!("verify needs n <= {ORACLE_CAP}, got {n}"));
                }
            }
        }
        Ok(())
    }

    /// Directory for outputs, overridden by `--out` when given.
    pub fn resolve_output(&self, out: Option<&Path>) -> PathBuf {
        out.map_or_else(|| self.output_dir.clone(), Path::to_path_buf)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const AREALAW: &str = r#"
kind = "arealaw"
master_seed = 7
realizations = 3
n_values = [20]
output_dir = "out"

[ensemble]
mu = 1.0
nu = [0.0, 5.0]

[subintervals]
policy = "centered"
ell = [2, 5]
"#;

    #[test]
    fn parses_minimal_arealaw_config() {
        let c = ExperimentConfig::from_toml(AREALAW).unwrap();
        c.validate().unwrap();
        assert_eq!(c.kind, ExperimentKind::Arealaw);
        assert_eq!(c.ensemble.nu, CouplingValue::Uniform([0.0, 5.0]));
        assert_eq!(c.ensemble.gamma, CouplingValue::Constant(0.0));
        assert_eq!(c.alpha, AlphaConfig::default());
        let subs = c.subintervals(20).unwrap();
        assert_eq!((subs[1].start(), subs[1].len()), (7, 5));
    }

    #[test]
    fn canonical_rendering_round_trips() {
        let c = ExperimentConfig::from_toml(AREALAW).unwrap();
        let again = ExperimentConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn rejects_invalid_configs() {
        let bad_ell = AREALAW.replace("ell = [2, 5]", "ell = [2, 50]");
        let c = ExperimentConfig::from_toml(&bad_ell).unwrap();
        assert!(matches!(c.validate(), Err(AppError::Config(_))));

        let no_real = AREALAW.replace("realizations = 3", "realizations = 0");
        assert!(ExperimentConfig::from_toml(&no_real)
            .unwrap()
            .validate()
            .is_err());

        let bad_range = AREALAW.replace("nu = [0.0, 5.0]", "nu = [5.0, 0.0]");
        assert!(ExperimentConfig::from_toml(&bad_range)
            .unwrap()
            .validate()
            .is_err());

        assert!(ExperimentConfig::from_toml(&AREALAW.replace("kind", "kinds")).is_err());
    }

    #[test]
    fn explicit_policy_needs_r() {
        let text = AREALAW.replace("policy = \"centered\"", "policy = \"explicit\"");
        let c = ExperimentConfig::from_toml(&text).unwrap();
        assert!(c.validate().is_err());
        let c =
            ExperimentConfig::from_toml(&text.replace("ell = [2, 5]", "ell = [4]\nr = 3")).unwrap();
        c.validate().unwrap();
        assert_eq!(c.subintervals(20).unwrap()[0].start(), 2);
    }

    #[test]
    fn verify_respects_oracle_cap() {
        let text = AREALAW
            .replace("kind = \"arealaw\"", "kind = \"verify\"")
            .replace("n_values = [20]", "n_values = [13]");
        let c = ExperimentConfig::from_toml(&text).unwrap();
        assert!(c.validate().is_err());
    }
}
