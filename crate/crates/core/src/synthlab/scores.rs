//! Token-score streams whose detector statistics follow planted targets.
//!
//! Each text gets one target per detector,
//! `T = beta_inv (x . u_inv) + beta_cls (x . u_cls) + noise * z`, with `z`
//! a standard normal keyed by (detector, text id). The target is written into
//! constant per-token statistics through strictly increasing maps, so the
//! detector's oriented score is a monotone function of `T` and every
//! rank-based quantity (AUROC, Spearman) matches the target exactly:
//!
//! * log-likelihood: `logp = -(1.5 + atan(T) / pi)`, oriented `-mean logp`
//! * entropy: `h = 3.5 + atan(T) / pi`
//! * log-rank: mean `ln rank` hits `9 + 2 atan(T) / pi` by mixing two
//!   adjacent integer ranks
//! * Fast-DetectGPT: the conditional variance is chosen so the statistic is
//!   `exp(T / 2)`
//!
//! LRR is a ratio of the log-likelihood and log-rank streams and Lastde is
//! degenerate on constant sequences, so neither can be driven independently.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{dot, PlantedDirections, SynthError};
use crate::corpus_io::{TextRecord, TokenScoreRecord};
use crate::detectors::{DetectorError, DetectorKind, TextDetector};
use crate::seeding;

pub const SYNTHESIZABLE: [DetectorKind; 4] = [
    DetectorKind::LogLik,
    DetectorKind::LogRank,
    DetectorKind::Entropy,
    DetectorKind::FastDetectGpt,
];

/// Sampled log-probs per position in synthetic records.
pub const SYNTH_K_SAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reliance {
    pub beta_inv: f64,
    pub beta_cls: f64,
    pub noise: f64,
}

impl Default for Reliance {
    /// No reliance: the target is unit noise.
    fn default() -> Self {
        Self {
            beta_inv: 0.0,
            beta_cls: 0.0,
            noise: 1.0,
        }
    }
}

pub type RelianceTable = BTreeMap<DetectorKind, Reliance>;

pub(super) fn check_table(t: &RelianceTable) -> Result<(), SynthError> {
    match t.keys().find(|k| !SYNTHESIZABLE.contains(k)) {
        Some(&k) => Err(SynthError::NotSynthesizable(k)),
        None => Ok(()),
    }
}

fn planted_target(r: &Reliance, u_inv: &[f64], u_cls: &[f64], x: &[f64], seed: u64, key: &str) -> f64 {
    let z: f64 = if r.noise == 0.0 {
        0.0
    } else {
        seeding::rng_for_key(seed, key).sample(StandardNormal)
    };
    r.beta_inv * dot(x, u_inv) + r.beta_cls * dot(x, u_cls) + r.noise * z
}

/// Token scores for `n_tokens` tokens (so `n_tokens - 1` positions) encoding
/// the targets of log-likelihood, log-rank, entropy and Fast-DetectGPT.
pub fn encode_scores(tokens: &[String], t_loglik: f64, t_logrank: f64, t_entropy: f64, t_fdg: f64) -> Vec<TokenScoreRecord> {
    let n = tokens.len() - 1;
    let logp = -(1.5 + t_loglik.atan() / PI);
    let h = 3.5 + t_entropy.atan() / PI;

    let y = 9.0 + 2.0 * t_logrank.atan() / PI;
    let r0 = y.exp().floor();
    let step = (1.0 + 1.0 / r0).ln();
    let k = (((y - r0.ln()) / step) * n as f64).round().clamp(0.0, n as f64) as usize;

    let var = n as f64 * (logp + h).powi(2) * (-t_fdg.clamp(-40.0, 40.0)).exp();
    tokens[1..]
        .iter()
        .enumerate()
        .map(|(i, tok)| TokenScoreRecord {
            token_text: tok.clone(),
            logp_actual: logp,
            rank: r0 as u64 + u64::from(i < k),
            entropy: h,
            cond_mean_logp: -h,
            cond_var_logp: var,
            sampled_logp: Some((0..SYNTH_K_SAMPLES).map(|j| logp - 0.05 * (j + 1) as f64).collect()),
        })
        .collect()
}

/// Fills token scores of (possibly shuffled) synthetic texts from their
/// activations.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthRescorer {
    planted: PlantedDirections,
    reliance: RelianceTable,
    seed: u64,
}

impl SynthRescorer {
    pub fn new(planted: PlantedDirections, reliance: RelianceTable, seed: u64) -> Self {
        Self {
            planted,
            reliance,
            seed,
        }
    }

    pub fn target(&self, kind: DetectorKind, text_id: &str, x: &[f64]) -> f64 {
        let r = self.reliance.get(&kind).copied().unwrap_or_default();
        let key = format!("{}:{text_id}", kind.name());
        planted_target(&r, &self.planted.u_inv, &self.planted.u_cls, x, self.seed, &key)
    }

    pub fn rescore(&self, t: &mut TextRecord, x: &[f64]) {
        let [a, b, c, d] = SYNTHESIZABLE.map(|k| self.target(k, &t.id, x));
        t.scores = Some(encode_scores(&t.tokens, a, b, c, d));
        t.needs_scoring = false;
    }
}

/// Detector that scores a text straight from its activation with a planted
/// reliance on `u_inv` and `u_cls`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedDetector {
    pub name: String,
    pub reliance: Reliance,
    pub u_inv: Vec<f64>,
    pub u_cls: Vec<f64>,
    pub seed: u64,
}

impl PlantedDetector {
    pub fn new(name: impl Into<String>, reliance: Reliance, planted: &PlantedDirections, seed: u64) -> Self {
        Self {
            name: name.into(),
            reliance,
            u_inv: planted.u_inv.clone(),
            u_cls: planted.u_cls.clone(),
            seed,
        }
    }
}

impl TextDetector for PlantedDetector {
    fn name(&self) -> &str {
        &self.name
    }

    fn needs_activation(&self) -> bool {
        true
    }

    fn oriented_score(&self, text: &TextRecord, activation: Option<&[f64]>) -> Result<f64, DetectorError> {
        let x = activation.ok_or_else(|| DetectorError::MissingActivation { text_id: text.id.clone() })?;
        let key = format!("{}:{}", self.name, text.id);
        Ok(planted_target(&self.reliance, &self.u_inv, &self.u_cls, x, self.seed, &key))
    }
}
