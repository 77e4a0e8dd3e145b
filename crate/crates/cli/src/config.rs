use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use ivtr_core::detectors::{DetectorConfig, DetectorKind};
use ivtr_core::inversion::{DiffNormalization, PairingMode};
use ivtr_core::stats::LogisticConfig;
use ivtr_core::stylocheck::ProbeParams;
use ivtr_core::synthlab::{ProbeEmbedderConfig, Reliance, RelianceTable, SynthConfig};

/// Planted detector family used by `stylocheck --planted`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantedFamily {
    pub beta_inv: Vec<f64>,
    pub beta_cls: f64,
    pub noise: f64,
}

impl Default for PlantedFamily {
    fn default() -> Self {
        Self {
            beta_inv: vec![-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0],
            beta_cls: 1.0,
            noise: 0.5,
        }
    }
}

/// Everything a run reads besides its input files, loaded from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Registry detectors to evaluate, in output order.
    pub detectors: Vec<DetectorKind>,
    pub detector: DetectorConfig,
    pub pairing_mode: PairingMode,
    pub diff_normalization: DiffNormalization,
    /// Activation tag; defaults to the corpus' only tag or the synthlab tag.
    pub module_tag: Option<String>,
    pub probes: ProbeParams,
    pub ablation_counts: Vec<usize>,
    pub embedder: ProbeEmbedderConfig,
    pub logistic: LogisticConfig,
    pub holdout_fraction: f64,
    pub synth: SynthConfig,
    /// Per-detector reliance of synthetic token scores, keyed by detector name.
    pub reliance: BTreeMap<String, Reliance>,
    pub planted: PlantedFamily,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            detectors: DetectorKind::ALL.to_vec(),
            detector: DetectorConfig::default(),
            pairing_mode: PairingMode::default(),
            diff_normalization: DiffNormalization::default(),
            module_tag: None,
            probes: ProbeParams::default(),
            ablation_counts: vec![1, 2, 3, 5, 10],
            embedder: ProbeEmbedderConfig::default(),
            logistic: LogisticConfig::default(),
            holdout_fraction: 0.2,
            synth: SynthConfig::default(),
            reliance: default_reliance(),
            planted: PlantedFamily::default(),
        }
    }
}

fn default_reliance() -> BTreeMap<String, Reliance> {
    let r = |beta_inv, beta_cls| Reliance {
        beta_inv,
        beta_cls,
        noise: 0.3,
    };
    BTreeMap::from([
        ("loglik".to_owned(), r(1.0, 0.5)),
        ("logrank".to_owned(), r(0.5, 0.5)),
        ("entropy".to_owned(), r(-1.0, 0.5)),
        ("fastdetectgpt".to_owned(), r(0.0, 1.0)),
    ])
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Applies command-line overrides and checks cross-field constraints.
    pub fn finish(mut self, seed: Option<u64>, strict: bool) -> Result<Self> {
        if let Some(s) = seed {
            self.seed = s;
        }
        self.synth.seed = self.seed;
        self.detector.strict |= strict;
        self.detector.validate()?;
        if self.detectors.is_empty() {
            bail!("config lists no detectors");
        }
        if !(self.holdout_fraction > 0.0 && self.holdout_fraction < 1.0) {
            bail!("holdout_fraction must lie strictly between 0 and 1");
        }
        Ok(self)
    }

    pub fn reliance_table(&self) -> Result<RelianceTable> {
        self.reliance
            .iter()
            .map(|(name, r)| Ok((name.parse::<DetectorKind>()?, *r)))
            .collect()
    }
}
