//! Training-free detector statistics over per-token scores.
//!
//! Every statistic has a *raw* value and an *orientation*; the oriented score
//! is the raw value or its negation so that larger oriented scores mean
//! "more likely MGT". Orientations default to the registry in
//! [`DetectorKind::default_orientation`] and can be overridden per detector.

mod lastde;

pub use lastde::{
    coarse_grain, diversity_entropy, lastde_raw, multiscale_diversity_entropy,
    normalize_against_contrasts, LastdeConfig,
};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus_io::{ActivationTable, Subset, TextRecord, TokenScoreRecord};
use crate::stats::{auroc_split, StatsError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DetectorError {
    #[error("text {text_id} carries no token scores")]
    NoScores { text_id: String },
    #[error("sum of log-ranks is below epsilon")]
    DegenerateRankSequence,
    #[error("sum of conditional variances is zero")]
    ZeroConditionalVariance,
    #[error("sequence of {got} scored positions is too short, need {needed}")]
    TooShort { needed: usize, got: usize },
    #[error("every window pair is identical (diversity entropy 0)")]
    DegenerateSequence,
    #[error("position {position} lacks the required sampled log-probs")]
    MissingSamples { position: usize },
    #[error("invalid detector config: {0}")]
    InvalidConfig(String),
    #[error("unknown detector {0:?}")]
    UnknownDetector(String),
    #[error("no activation for text {text_id}")]
    MissingActivation { text_id: String },
    #[error("detector {detector} produced a non-finite score")]
    NonFinite { detector: String },
    #[error("detector {detector} failed on all {count} texts")]
    AllTextsFailed { detector: String, count: usize },
    #[error(transparent)]
    Stats(#[from] StatsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorKind {
    #[serde(rename = "loglik")]
    LogLik,
    #[serde(rename = "logrank")]
    LogRank,
    Entropy,
    Lrr,
    #[serde(rename = "fastdetectgpt")]
    FastDetectGpt,
    Lastde,
    #[serde(rename = "lastde_pp")]
    LastdePp,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 7] = [
        Self::LogLik,
        Self::LogRank,
        Self::Entropy,
        Self::Lrr,
        Self::FastDetectGpt,
        Self::Lastde,
        Self::LastdePp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::LogLik => "loglik",
            Self::LogRank => "logrank",
            Self::Entropy => "entropy",
            Self::Lrr => "lrr",
            Self::FastDetectGpt => "fastdetectgpt",
            Self::Lastde => "lastde",
            Self::LastdePp => "lastde_pp",
        }
    }

    /// Registry default: lower log-likelihood and lower Lastde are read as
    /// MGT, every other statistic as higher-is-MGT.
    pub fn default_orientation(self) -> Orientation {
        match self {
            Self::LogLik | Self::Lastde => Orientation::LowerIsMgt,
            _ => Orientation::HigherIsMgt,
        }
    }

    /// Raw statistic of one text.
    pub fn raw(self, t: &TextRecord, cfg: &DetectorConfig) -> Result<f64, DetectorError> {
        let s = t.scored();
        if s.is_empty() {
            return Err(DetectorError::NoScores { text_id: t.id.clone() });
        }
        let raw = match self {
            Self::LogLik => loglik_raw(s),
            Self::LogRank => logrank_raw(s),
            Self::Entropy => entropy_raw(s),
            Self::Lrr => lrr_raw(s, cfg.epsilon_lrr, cfg.strict)?,
            Self::FastDetectGpt => fastdetectgpt_raw(s)?,
            Self::Lastde => {
                let seq: Vec<f64> = s.iter().map(|r| r.logp_actual).collect();
                lastde_raw(&seq, &cfg.lastde, cfg.strict)?
            }
            Self::LastdePp => lastde_pp_raw(s, &cfg.lastde, cfg.strict)?,
        };
        if !raw.is_finite() {
            return Err(DetectorError::NonFinite {
                detector: self.name().into(),
            });
        }
        Ok(raw)
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DetectorKind {
    type Err = DetectorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| DetectorError::UnknownDetector(s.to_owned()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    HigherIsMgt,
    LowerIsMgt,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Self::HigherIsMgt => 1.0,
            Self::LowerIsMgt => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Self::HigherIsMgt => Self::LowerIsMgt,
            Self::LowerIsMgt => Self::HigherIsMgt,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    pub lastde: LastdeConfig,
    pub epsilon_lrr: f64,
    /// Turns degenerate-denominator floors into errors.
    pub strict: bool,
    /// Per-detector overrides of the registry orientation.
    pub orientation: BTreeMap<DetectorKind, Orientation>,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            lastde: LastdeConfig::default(),
            epsilon_lrr: 1e-6,
            strict: false,
            orientation: BTreeMap::new(),
        }
    }
}

impl DetectorConfig {
    pub fn orientation_of(&self, kind: DetectorKind) -> Orientation {
        self.orientation
            .get(&kind)
            .copied()
            .unwrap_or_else(|| kind.default_orientation())
    }

    pub fn validate(&self) -> Result<(), DetectorError> {
        self.lastde.validate()?;
        if !(self.epsilon_lrr > 0.0) {
            return Err(DetectorError::InvalidConfig("epsilon_lrr must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectorScore {
    pub detector_name: String,
    pub raw: f64,
    pub oriented: f64,
}

pub fn score(kind: DetectorKind, t: &TextRecord, cfg: &DetectorConfig) -> Result<DetectorScore, DetectorError> {
    let raw = kind.raw(t, cfg)?;
    Ok(DetectorScore {
        detector_name: kind.name().into(),
        raw,
        oriented: raw * cfg.orientation_of(kind).sign(),
    })
}

fn mean(it: impl Iterator<Item = f64>, n: usize) -> f64 {
    it.sum::<f64>() / n as f64
}

pub fn loglik_raw(s: &[TokenScoreRecord]) -> f64 {
    mean(s.iter().map(|r| r.logp_actual), s.len())
}

pub fn logrank_raw(s: &[TokenScoreRecord]) -> f64 {
    mean(s.iter().map(|r| (r.rank as f64).ln()), s.len())
}

pub fn entropy_raw(s: &[TokenScoreRecord]) -> f64 {
    mean(s.iter().map(|r| r.entropy), s.len())
}

/// `|sum logp| / max(sum ln rank, epsilon)`.
pub fn lrr_raw(s: &[TokenScoreRecord], epsilon: f64, strict: bool) -> Result<f64, DetectorError> {
    let ll: f64 = s.iter().map(|r| r.logp_actual).sum();
    let lr: f64 = s.iter().map(|r| (r.rank as f64).ln()).sum();
    if strict && lr < epsilon {
        return Err(DetectorError::DegenerateRankSequence);
    }
    Ok(ll.abs() / lr.max(epsilon))
}

/// Analytic sampling discrepancy: `(sum logp - sum mu) / sqrt(sum var)`.
pub fn fastdetectgpt_raw(s: &[TokenScoreRecord]) -> Result<f64, DetectorError> {
    let var: f64 = s.iter().map(|r| r.cond_var_logp).sum();
    if var <= 0.0 {
        return Err(DetectorError::ZeroConditionalVariance);
    }
    let num: f64 = s.iter().map(|r| r.logp_actual - r.cond_mean_logp).sum();
    Ok(num / var.sqrt())
}

/// Lastde of the realized sequence standardized against `K` contrast
/// sequences built from the sampled log-probs.
pub fn lastde_pp_raw(s: &[TokenScoreRecord], cfg: &LastdeConfig, strict: bool) -> Result<f64, DetectorError> {
    let k = cfg.contrast_count;
    if k < 2 {
        return Err(DetectorError::InvalidConfig("lastde_pp needs contrast_count >= 2".into()));
    }
    cfg.validate()?;
    if s.len() < cfg.min_len() {
        return Err(DetectorError::TooShort {
            needed: cfg.min_len(),
            got: s.len(),
        });
    }
    let mut contrasts = vec![Vec::with_capacity(s.len()); k];
    for (position, r) in s.iter().enumerate() {
        match &r.sampled_logp {
            Some(v) if v.len() >= k => {
                for (c, &x) in contrasts.iter_mut().zip(v) {
                    c.push(x);
                }
            }
            _ => return Err(DetectorError::MissingSamples { position }),
        }
    }
    let actual: Vec<f64> = s.iter().map(|r| r.logp_actual).collect();
    let a = lastde_raw(&actual, cfg, strict)?;
    let c = contrasts
        .iter()
        .map(|seq| lastde_raw(seq, cfg, strict))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(normalize_against_contrasts(a, &c))
}

/// Anything that maps a text (and optionally its activation) to an oriented
/// score where larger means "more MGT".
pub trait TextDetector: Send + Sync {
    fn name(&self) -> &str;

    /// Whether [`TextDetector::oriented_score`] reads the activation.
    fn needs_activation(&self) -> bool {
        false
    }

    fn oriented_score(&self, text: &TextRecord, activation: Option<&[f64]>) -> Result<f64, DetectorError>;
}

/// A registry detector bound to a config.
#[derive(Debug, Clone, PartialEq)]
pub struct Detector {
    pub kind: DetectorKind,
    pub config: DetectorConfig,
}

impl Detector {
    pub fn new(kind: DetectorKind, config: DetectorConfig) -> Self {
        Self { kind, config }
    }

    pub fn score(&self, t: &TextRecord) -> Result<DetectorScore, DetectorError> {
        score(self.kind, t, &self.config)
    }
}

impl TextDetector for Detector {
    fn name(&self) -> &str {
        self.kind.name()
    }

    fn oriented_score(&self, text: &TextRecord, _: Option<&[f64]>) -> Result<f64, DetectorError> {
        self.score(text).map(|s| s.oriented)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Excluded {
    pub text_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub detector: String,
    pub auroc: f64,
    pub n_excluded: usize,
    pub excluded: Vec<Excluded>,
}

impl Evaluation {
    /// Oriented scores rank HWTs above MGTs more often than not.
    pub fn is_inverted(&self) -> bool {
        self.auroc < 0.5
    }
}

/// Oriented scores of `texts`, in order; failures are returned per text.
pub fn score_texts(
    det: &dyn TextDetector,
    texts: &[&TextRecord],
    activations: Option<&ActivationTable>,
) -> Vec<Result<f64, DetectorError>> {
    texts
        .par_iter()
        .map(|t| {
            let act = match activations {
                Some(table) => table.for_record(t),
                None => None,
            };
            if det.needs_activation() && act.is_none() {
                return Err(DetectorError::MissingActivation { text_id: t.id.clone() });
            }
            let s = det.oriented_score(t, act)?;
            if s.is_finite() {
                Ok(s)
            } else {
                Err(DetectorError::NonFinite {
                    detector: det.name().into(),
                })
            }
        })
        .collect()
}

/// AUROC of the detector's oriented scores on a subset, MGT positive.
/// Texts the detector cannot score are excluded and listed.
pub fn evaluate_detector(
    det: &dyn TextDetector,
    subset: &Subset,
    activations: Option<&ActivationTable>,
) -> Result<Evaluation, DetectorError> {
    let texts: Vec<&TextRecord> = subset.texts().collect();
    let scores = score_texts(det, &texts, activations);
    let mut pos = Vec::with_capacity(subset.mgt.len());
    let mut neg = Vec::with_capacity(subset.hwt.len());
    let mut excluded = Vec::new();
    for (t, s) in texts.iter().zip(scores) {
        match s {
            Ok(v) if t.is_mgt() => pos.push(v),
            Ok(v) => neg.push(v),
            Err(e) => excluded.push(Excluded {
                text_id: t.id.clone(),
                reason: e.to_string(),
            }),
        }
    }
    if excluded.len() == texts.len() {
        return Err(DetectorError::AllTextsFailed {
            detector: det.name().into(),
            count: texts.len(),
        });
    }
    if !excluded.is_empty() {
        log::debug!("{}: excluded {} texts in {}", det.name(), excluded.len(), subset.key);
    }
    Ok(Evaluation {
        detector: det.name().into(),
        auroc: auroc_split(&pos, &neg)?,
        n_excluded: excluded.len(),
        excluded,
    })
}
