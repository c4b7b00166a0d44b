//! Experiment configuration: suite selection, sample counts, grid and
//! smoothing knobs, and the named threshold map.
//!
//! Configs load from TOML. Every threshold has a per-suite default; user
//! entries override by name, and the merged map is echoed into the report
//! so a run is self-describing.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::ensemble::EnsembleSpec;
use crate::{Error, Result};

/// Which measurement suite a run executes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Semicircle,
    LocalLaw,
    EdgeLaw,
    EdgeEvec,
    BulkEvec,
    Eth,
    Smoothing,
    All,
}

impl Suite {
    pub const ALL_TAGS: [&'static str; 8] =
        ["semicircle", "local-law", "edge-law", "edge-evec", "bulk-evec", "eth", "smoothing", "all"];

    pub fn tag(&self) -> &'static str {
        match self {
            Suite::Semicircle => "semicircle",
            Suite::LocalLaw => "local-law",
            Suite::EdgeLaw => "edge-law",
            Suite::EdgeEvec => "edge-evec",
            Suite::BulkEvec => "bulk-evec",
            Suite::Eth => "eth",
            Suite::Smoothing => "smoothing",
            Suite::All => "all",
        }
    }

    pub fn parse(s: &str) -> Result<Suite> {
        match s {
            "semicircle" => Ok(Suite::Semicircle),
            "local-law" => Ok(Suite::LocalLaw),
            "edge-law" => Ok(Suite::EdgeLaw),
            "edge-evec" => Ok(Suite::EdgeEvec),
            "bulk-evec" => Ok(Suite::BulkEvec),
            "eth" => Ok(Suite::Eth),
            "smoothing" => Ok(Suite::Smoothing),
            "all" => Ok(Suite::All),
            other => Err(Error::invalid(
                "suite",
                format!("unknown suite {other:?}; expected one of {}", Suite::ALL_TAGS.join(", ")),
            )),
        }
    }

    /// The concrete suites a run of `self` executes, in order.
    pub fn members(&self) -> Vec<Suite> {
        match self {
            Suite::All => vec![
                Suite::Semicircle,
                Suite::LocalLaw,
                Suite::EdgeLaw,
                Suite::EdgeEvec,
                Suite::BulkEvec,
                Suite::Eth,
                Suite::Smoothing,
            ],
            one => vec![*one],
        }
    }
}

/// Spectral-domain grid resolution for local-law scans.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GridParams {
    #[serde(default = "default_n_e")]
    pub n_e: usize,
    #[serde(default = "default_n_eta")]
    pub n_eta: usize,
}

fn default_n_e() -> usize {
    10
}

fn default_n_eta() -> usize {
    8
}

impl Default for GridParams {
    fn default() -> Self {
        GridParams { n_e: default_n_e(), n_eta: default_n_eta() }
    }
}

/// Smoothing-suite exponents; see SmoothingParams::desk for the
/// constraints.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SmoothingKnobs {
    #[serde(default = "default_xi")]
    pub xi: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
}

fn default_xi() -> f64 {
    0.2
}

fn default_delta() -> f64 {
    0.05
}

impl Default for SmoothingKnobs {
    fn default() -> Self {
        SmoothingKnobs { xi: default_xi(), delta: default_delta() }
    }
}

fn default_m() -> usize {
    1
}

fn default_workers() -> usize {
    1
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Full description of one run. Loads from a flat TOML file with dotted
/// sections (`[ensemble]`, `[grid]`, `[smoothing]`, `[thresholds]`).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub suite: Suite,
    pub ensemble: EnsembleSpec,
    /// Measurement sample count per suite.
    #[serde(alias = "M", default = "default_m")]
    pub m: usize,
    #[serde(default)]
    pub grid: GridParams,
    #[serde(default)]
    pub smoothing: SmoothingKnobs,
    /// Named overrides; anything not set here keeps its per-suite default.
    #[serde(default)]
    pub thresholds: BTreeMap<String, f64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::invalid("config", format!("TOML parse failed: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Format {
            path: path.display().to_string(),
            reason: format!("cannot read config: {e}"),
        })?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 1 {
            return Err(Error::invalid("M", "need M >= 1"));
        }
        if self.workers < 1 {
            return Err(Error::invalid("workers", "need workers >= 1"));
        }
        if self.grid.n_e < 1 || self.grid.n_eta < 1 {
            return Err(Error::invalid("grid", "need n_e >= 1 and n_eta >= 1"));
        }
        let known = default_thresholds(Suite::All);
        for (name, &value) in &self.thresholds {
            if !(value > 0.0) {
                return Err(Error::invalid("thresholds", format!("threshold {name:?} must be positive, got {value}")));
            }
            if !known.contains_key(name.as_str()) {
                return Err(Error::invalid("thresholds", format!("unknown threshold name {name:?}")));
            }
        }
        self.ensemble.validate()
    }

    /// Per-suite defaults overlaid with the user's entries; this merged
    /// map is what the report echoes and the suites read.
    pub fn merged_thresholds(&self) -> BTreeMap<String, f64> {
        let mut merged: BTreeMap<String, f64> =
            default_thresholds(self.suite).into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        for (name, &value) in &self.thresholds {
            merged.insert(name.clone(), value);
        }
        merged
    }

    /// Threshold lookup by name. Panics on a name absent from both the
    /// defaults and the overrides; suite code only asks for its own names.
    pub fn threshold(&self, name: &str) -> f64 {
        if let Some(&v) = self.thresholds.get(name) {
            return v;
        }
        default_thresholds(self.suite)
            .get(name)
            .copied()
            .unwrap_or_else(|| panic!("no default for threshold {name:?}"))
    }
}

/// Default pass thresholds for every check a suite emits.
pub fn default_thresholds(suite: Suite) -> BTreeMap<&'static str, f64> {
    let mut map = BTreeMap::new();
    for member in suite.members() {
        let entries: &[(&'static str, f64)] = match member {
            Suite::Semicircle => &[("semicircle-ks", 0.03)],
            Suite::LocalLaw => &[
                ("iso-ratio-p99", 10.0),
                ("ee-mean-scaled", 10.0),
                ("ev-p99-scaled", 10.0),
                ("deloc-inf-norm-ratio", 1.0),
                ("deloc-e-overlap-scaled", 30.0),
            ],
            Suite::EdgeLaw => &[
                ("edge-two-sample-ks", 0.10),
                ("interlacing-violations", 0.5),
                ("z-mean-se", 3.0),
                ("z-clt-ks", 0.06),
                ("fourth-moment-rel-err", 0.10),
                ("repulsion-frequency", 0.05),
            ],
            Suite::EdgeEvec => &[
                ("chi-sq-ks", 0.05),
                ("ecf-sup", 0.05),
                ("cross-index-corr-se", 3.0),
                ("top-lambda-fail-rate", 0.05),
                ("top-align-fail-rate", 0.05),
                ("e-mass-nontop-scaled", 10.0),
            ],
            Suite::BulkEvec => &[("bulk-mean-dev", 0.15), ("bulk-fourth-dev", 0.5), ("bulk-cross-dev-se", 3.0)],
            Suite::Eth => &[
                ("eth-ks-diag-pm", 0.06),
                ("eth-ks-random-sym", 0.06),
                ("eth-scan-max", 8.0),
                ("eth-cross-corr-se", 3.0),
            ],
            Suite::Smoothing => &[("smoothing-fail-rate", 0.05), ("smoothing-quadrature-drift", 1e-6)],
            Suite::All => unreachable!("members() never yields All"),
        };
        map.extend(entries.iter().copied());
    }
    map
}
