//! Experiment configuration, read from TOML. Every field is optional.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bench::metrics::ProbePolicy;
use crate::budget::PrivacyBudget;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MechanismKind {
    Ours,
    KFold,
    Sampling,
    Naive,
    Bucketed,
}

impl MechanismKind {
    pub fn name(self) -> &'static str {
        match self {
            MechanismKind::Ours => "ours",
            MechanismKind::KFold => "kfold",
            MechanismKind::Sampling => "sampling",
            MechanismKind::Naive => "naive",
            MechanismKind::Bucketed => "bucketed",
        }
    }

    pub(crate) fn tag(self) -> u64 {
        self as u64 + 1
    }
}

/// Neighboring notion: one coordinate, the whole vector, or an explicit L1
/// distance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Level {
    Event,
    User,
    Distance(f64),
}

impl Level {
    pub fn neighbor_distance(self, k: usize) -> f64 {
        match self {
            Level::Event => 2.0,
            Level::User => 2.0 * k as f64,
            Level::Distance(l) => l,
        }
    }

    pub fn budget(self, epsilon: f64, delta: f64, k: usize) -> Result<PrivacyBudget> {
        PrivacyBudget::new(epsilon, delta, self.neighbor_distance(k), k)
    }

    pub(crate) fn tag(self) -> u64 {
        match self {
            Level::Event => 1,
            Level::User => 2,
            Level::Distance(l) => l.to_bits(),
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::Event => f.write_str("event"),
            Level::User => f.write_str("user"),
            Level::Distance(l) => write!(f, "L={l}"),
        }
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "event" => Ok(Level::Event),
            "user" => Ok(Level::User),
            _ => s
                .strip_prefix("L=")
                .and_then(|l| l.parse::<f64>().ok())
                .filter(|l| *l > 0.0 && l.is_finite())
                .map(Level::Distance)
                .ok_or_else(|| Error::Config(format!("level {s:?} is not event, user or L=<value>"))),
        }
    }
}

impl TryFrom<String> for Level {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Level> for String {
    fn from(l: Level) -> String {
        l.to_string()
    }
}

impl fmt::Display for ProbePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProbePolicy::All => f.write_str("all"),
            ProbePolicy::Top(m) => write!(f, "top:{m}"),
        }
    }
}

/// A sweep: every combination of `n`, `d`, `k`, `levels`, `epsilon`,
/// `delta` and `mechanisms` becomes one metrics row averaged over `runs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    /// Seeds the synthetic data; derived from `master_seed` when absent.
    pub dataset_seed: Option<u64>,
    pub runs: usize,
    pub mechanisms: Vec<MechanismKind>,
    pub levels: Vec<Level>,
    pub n: Vec<usize>,
    pub d: Vec<usize>,
    pub k: Vec<usize>,
    pub epsilon: Vec<f64>,
    pub delta: Vec<f64>,
    pub beta: f64,
    /// `"all"` or `"top:<m>"`.
    pub probe: String,
    pub zipf_s: f64,
    pub mu: f64,
    pub sigma: f64,
    /// A dataset file replaces the synthetic generator; `n`, `d`, `k` then
    /// come from the file.
    pub dataset: Option<PathBuf>,
    pub discretize: bool,
    /// Share of the sampling baseline's budget spent on the value.
    pub sampling_value_share: f64,
    /// Record wall-clock time; off gives byte-reproducible CSVs.
    pub timing: bool,
    /// Worker threads, 0 for all cores.
    pub threads: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            master_seed: 1,
            dataset_seed: None,
            runs: 10,
            mechanisms: vec![MechanismKind::Ours],
            levels: vec![Level::Event, Level::User],
            n: vec![100_000],
            d: vec![10_000],
            k: vec![64],
            epsilon: vec![1.0],
            delta: vec![0.0],
            beta: 0.05,
            probe: "top:100".into(),
            zipf_s: 1.4,
            mu: 1.0,
            sigma: 0.3,
            dataset: None,
            discretize: false,
            sampling_value_share: 0.5,
            timing: true,
            threads: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn probe_policy(&self) -> Result<ProbePolicy> {
        self.probe.parse()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.into()));
        if self.runs == 0 {
            return bad("runs must be at least 1");
        }
        if self.mechanisms.is_empty() || self.levels.is_empty() || self.epsilon.is_empty() || self.delta.is_empty() {
            return bad("mechanisms, levels, epsilon and delta need at least one entry");
        }
        if self.dataset.is_none() && (self.n.is_empty() || self.d.is_empty() || self.k.is_empty()) {
            return bad("n, d and k need at least one entry");
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return bad("beta must lie in (0, 1)");
        }
        self.probe_policy()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_partial_files() {
        let cfg = ExperimentConfig::from_toml("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!((cfg.n[0], cfg.d[0], cfg.k[0], cfg.epsilon[0], cfg.beta), (100_000, 10_000, 64, 1.0, 0.05));

        let cfg = ExperimentConfig::from_toml(
            r#"
            mechanisms = ["ours", "kfold"]
            levels = ["event", "L=16"]
            k = [4, 16]
            probe = "all"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.mechanisms, vec![MechanismKind::Ours, MechanismKind::KFold]);
        assert_eq!(cfg.levels, vec![Level::Event, Level::Distance(16.0)]);
        assert_eq!(cfg.probe_policy().unwrap(), ProbePolicy::All);
        assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(ExperimentConfig::from_toml("runs = 0").is_err());
        assert!(ExperimentConfig::from_toml("levels = [\"L=-1\"]").is_err());
        assert!(ExperimentConfig::from_toml("probe = \"some\"").is_err());
        assert!(ExperimentConfig::from_toml("typo = 3").is_err());
        assert!(ExperimentConfig::from_toml("mechanisms = [\"harmony\"]").is_err());
    }
}
