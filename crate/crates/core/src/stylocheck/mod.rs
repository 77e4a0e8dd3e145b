//! Transferability estimation from probe datasets.
//!
//! A probe dataset takes one general and one personalized HWT, shuffles both
//! across a Kendall's-tau grid, embeds every variant and keeps the variants
//! with the highest (positives) and lowest (negatives) projection onto the
//! inverted direction. Shuffling keeps the token multiset, so the two classes
//! differ mainly along that direction. A detector's AUROC on such probes
//! measures how much it leans on the inverted feature, which in turn predicts
//! its general-to-personalized performance gap.

mod run;

pub use run::{ablation_probe_count, stylocheck_run, AblationRow, DetectorInputs, RunSummary};

use std::collections::BTreeMap;

use log::info;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus_io::{ActivationTable, ClassLabel, CorpusError, Subset, TextRecord};
use crate::detectors::{evaluate_detector, DetectorError, TextDetector};
use crate::inversion::{feature_value, FeatureDirection, InversionError, ProbeClassifiers};
use crate::seeding;
use crate::shuffler::{tau_grid, variant_record, ShuffleError, ShuffleSpec};
use crate::stats::{auroc_split, StatsError};

/// Module tag under which probe activations are kept.
pub const PROBE_TAG: &str = "probe";

#[derive(Debug, Error)]
pub enum StyloError {
    #[error("probe source {text_id} is not an HWT")]
    NotHwt { text_id: String },
    #[error("embedding {text_id} failed: {reason}")]
    EmbedderFailure { text_id: String, reason: String },
    #[error("probe {probe_id}: text {text_id} has no token scores")]
    MissingScores { probe_id: String, text_id: String },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("all detectors share one transfer gap")]
    ZeroVariance,
    #[error(transparent)]
    Detector(#[from] DetectorError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Shuffle(#[from] ShuffleError),
    #[error(transparent)]
    Inversion(#[from] InversionError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

/// Maps a (possibly shuffled) text to an activation vector.
pub trait Embedder: Send + Sync {
    fn embed(&self, t: &TextRecord) -> Result<Vec<f64>, StyloError>;
}

/// Looks variants up by id in activations produced by an external scorer.
#[derive(Debug, Clone)]
pub struct StoreEmbedder {
    pub table: ActivationTable,
}

impl Embedder for StoreEmbedder {
    fn embed(&self, t: &TextRecord) -> Result<Vec<f64>, StyloError> {
        self.table
            .get(&t.id)
            .map(<[f64]>::to_vec)
            .ok_or_else(|| StyloError::EmbedderFailure {
                text_id: t.id.clone(),
                reason: format!("no {} activation for this variant", self.table.module_tag),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeParams {
    pub variants_per_source: usize,
    /// Positives (and negatives) kept per probe.
    pub select: usize,
    pub pool_size: usize,
    pub probes_per_trial: usize,
    pub trials: usize,
    pub margin: f64,
}

impl Default for ProbeParams {
    fn default() -> Self {
        Self {
            variants_per_source: 800,
            select: 50,
            pool_size: 100,
            probes_per_trial: 5,
            trials: 100,
            margin: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeakageReport {
    pub domain_probe_auroc: f64,
    pub mgt_probe_auroc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeDataset {
    pub id: String,
    /// Highest feature values first.
    pub positives: Vec<TextRecord>,
    /// Lowest feature value last.
    pub negatives: Vec<TextRecord>,
    pub source_ids: (String, String),
    pub w_star_ref: String,
    /// Feature values of the selected variants.
    pub feature_values: BTreeMap<String, f64>,
    pub leakage: LeakageReport,
    /// Activations of the selected variants.
    pub activations: ActivationTable,
}

impl ProbeDataset {
    pub fn records(&self) -> impl Iterator<Item = &TextRecord> {
        self.positives.iter().chain(&self.negatives)
    }

    /// Selected variants still waiting for token scores.
    pub fn needs_scoring(&self) -> impl Iterator<Item = &TextRecord> {
        self.records().filter(|r| r.scores.is_none())
    }

    pub fn min_positive(&self) -> f64 {
        self.positives.iter().map(|r| self.feature_values[&r.id]).fold(f64::INFINITY, f64::min)
    }

    pub fn max_negative(&self) -> f64 {
        self.negatives.iter().map(|r| self.feature_values[&r.id]).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Every shuffled variant a probe draws from: `variants_per_source` per
/// source over an even tau grid on `[-1, 1]`, general source first.
pub fn probe_variants(
    id: &str,
    general_hwt: &TextRecord,
    personalized_hwt: &TextRecord,
    params: &ProbeParams,
    seed: u64,
) -> Result<Vec<TextRecord>, StyloError> {
    let grid = tau_grid(params.variants_per_source, -1.0, 1.0)?;
    let mut jobs = Vec::with_capacity(2 * grid.len());
    for (si, src) in [general_hwt, personalized_hwt].into_iter().enumerate() {
        for (vi, &tau) in grid.iter().enumerate() {
            jobs.push((src, vi, ShuffleSpec::new(src.tokens.len(), tau, seeding::derive_seed(seed, &[si as u64, vi as u64]))));
        }
    }
    jobs.par_iter()
        .map(|(src, vi, spec)| Ok(variant_record(src, spec, *vi, Some(id))?))
        .collect()
}

/// Builds one probe dataset from a general and a personalized HWT.
#[allow(clippy::too_many_arguments)]
pub fn synth_probe(
    id: &str,
    general_hwt: &TextRecord,
    personalized_hwt: &TextRecord,
    w: &FeatureDirection,
    w_star_ref: &str,
    embedder: &dyn Embedder,
    classifiers: &ProbeClassifiers,
    params: &ProbeParams,
    seed: u64,
) -> Result<ProbeDataset, StyloError> {
    for t in [general_hwt, personalized_hwt] {
        if t.class_label != ClassLabel::Hwt {
            return Err(StyloError::NotHwt { text_id: t.id.clone() });
        }
    }
    let total = 2 * params.variants_per_source;
    if params.select == 0 || total < 2 * params.select {
        return Err(StyloError::Precondition(format!(
            "{total} variants cannot supply {} positives and {} negatives",
            params.select, params.select
        )));
    }
    let variants = probe_variants(id, general_hwt, personalized_hwt, params, seed)?;
    let mut scored: Vec<(f64, TextRecord, Vec<f64>)> = variants
        .into_par_iter()
        .map(|v| {
            let x = embedder.embed(&v)?;
            let f = feature_value(&x, w)?;
            Ok((f, v, x))
        })
        .collect::<Result<_, StyloError>>()?;
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.id.cmp(&b.1.id)));

    let k = params.select;
    let neg_start = scored.len() - k;
    let mut activations = ActivationTable::new(PROBE_TAG);
    let mut feature_values = BTreeMap::new();
    let mut positives = Vec::with_capacity(k);
    let mut negatives = Vec::with_capacity(k);
    let (mut dom_pos, mut dom_neg, mut mgt_pos, mut mgt_neg) = (vec![], vec![], vec![], vec![]);
    for (i, (f, r, x)) in scored.into_iter().enumerate() {
        let positive = i < k;
        if !positive && i < neg_start {
            continue;
        }
        let (dom, mgt) = (classifiers.domain.decision(&x), classifiers.mgt.decision(&x));
        if positive {
            dom_pos.push(dom);
            mgt_pos.push(mgt);
        } else {
            dom_neg.push(dom);
            mgt_neg.push(mgt);
        }
        feature_values.insert(r.id.clone(), f);
        activations.insert(r.id.clone(), x);
        if positive {
            positives.push(r);
        } else {
            negatives.push(r);
        }
    }
    Ok(ProbeDataset {
        id: id.to_owned(),
        positives,
        negatives,
        source_ids: (general_hwt.id.clone(), personalized_hwt.id.clone()),
        w_star_ref: w_star_ref.to_owned(),
        feature_values,
        leakage: LeakageReport {
            domain_probe_auroc: auroc_split(&dom_pos, &dom_neg)?,
            mgt_probe_auroc: auroc_split(&mgt_pos, &mgt_neg)?,
        },
        activations,
    })
}

/// Source pairs for `count` probes: each side is drawn without replacement
/// until exhausted, then with replacement.
pub fn draw_probe_sources(n_general: usize, n_personalized: usize, count: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = seeding::rng(seed, &[0x50c5]);
    let side = |n: usize, rng: &mut rand_chacha::ChaCha8Rng, name: &str| {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        if count > n {
            info!("{count} probes from {n} {name} HWTs: reusing sources with replacement");
            order.extend((n..count).map(|_| rng.random_range(0..n)));
        }
        order.truncate(count);
        order
    };
    let g = side(n_general, &mut rng, "general");
    let p = side(n_personalized, &mut rng, "personalized");
    g.into_iter().zip(p).collect()
}

/// A pool of `params.pool_size` probes built in parallel.
#[allow(clippy::too_many_arguments)]
pub fn build_probe_pool(
    general_hwts: &[&TextRecord],
    personalized_hwts: &[&TextRecord],
    w: &FeatureDirection,
    w_star_ref: &str,
    embedder: &dyn Embedder,
    classifiers: &ProbeClassifiers,
    params: &ProbeParams,
    seed: u64,
) -> Result<Vec<ProbeDataset>, StyloError> {
    if general_hwts.is_empty() || personalized_hwts.is_empty() {
        return Err(StyloError::Precondition("probe synthesis needs HWTs from both domains".into()));
    }
    probe_plan(general_hwts.len(), personalized_hwts.len(), params, seed)
        .par_iter()
        .map(|p| {
            synth_probe(
                &p.id,
                general_hwts[p.general],
                personalized_hwts[p.personalized],
                w,
                w_star_ref,
                embedder,
                classifiers,
                params,
                p.seed,
            )
        })
        .collect()
}

/// Id, source indices and seed of one probe in a pool.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlannedProbe {
    pub id: String,
    pub general: usize,
    pub personalized: usize,
    pub seed: u64,
}

/// The probes [`build_probe_pool`] builds for the same arguments.
pub fn probe_plan(n_general: usize, n_personalized: usize, params: &ProbeParams, seed: u64) -> Vec<PlannedProbe> {
    draw_probe_sources(n_general, n_personalized, params.pool_size, seed)
        .into_iter()
        .enumerate()
        .map(|(i, (g, p))| PlannedProbe {
            id: format!("probe{i:03}"),
            general: g,
            personalized: p,
            seed: seeding::derive_seed(seed, &[0x9b0be, i as u64]),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeEvaluation {
    pub per_probe: Vec<f64>,
    pub mean: f64,
}

/// AUROC of the detector on each probe, feature-value positives positive.
pub fn evaluate_on_probes(det: &dyn TextDetector, probes: &[ProbeDataset]) -> Result<ProbeEvaluation, StyloError> {
    if probes.is_empty() {
        return Err(StyloError::Precondition("no probes".into()));
    }
    let per_probe = probes
        .par_iter()
        .map(|p| {
            let score = |r: &TextRecord| -> Result<f64, StyloError> {
                if !det.needs_activation() && r.scores.is_none() {
                    return Err(StyloError::MissingScores {
                        probe_id: p.id.clone(),
                        text_id: r.id.clone(),
                    });
                }
                Ok(det.oriented_score(r, p.activations.for_record(r))?)
            };
            let pos = p.positives.iter().map(score).collect::<Result<Vec<_>, _>>()?;
            let neg = p.negatives.iter().map(score).collect::<Result<Vec<_>, _>>()?;
            Ok(auroc_split(&pos, &neg)?)
        })
        .collect::<Result<Vec<f64>, StyloError>>()?;
    let mean = per_probe.iter().sum::<f64>() / per_probe.len() as f64;
    Ok(ProbeEvaluation { per_probe, mean })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapReport {
    pub general_auroc: f64,
    pub personalized_auroc: f64,
    /// General minus personalized; positive means degradation.
    pub gap: f64,
}

/// Unweighted mean AUROC over each domain's subsets and their difference.
pub fn transfer_gap(
    det: &dyn TextDetector,
    general: &[Subset],
    personalized: &[Subset],
    activations: Option<&ActivationTable>,
) -> Result<GapReport, StyloError> {
    if general.is_empty() || personalized.is_empty() {
        return Err(StyloError::Precondition("transfer gap needs subsets from both domains".into()));
    }
    let mean = |subsets: &[Subset]| -> Result<f64, StyloError> {
        let a = subsets
            .par_iter()
            .map(|s| evaluate_detector(det, s, activations).map(|e| e.auroc))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(a.iter().sum::<f64>() / a.len() as f64)
    };
    let general_auroc = mean(general)?;
    let personalized_auroc = mean(personalized)?;
    Ok(GapReport {
        general_auroc,
        personalized_auroc,
        gap: general_auroc - personalized_auroc,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Degrade,
    Gain,
    Stable,
}

impl Verdict {
    pub fn from_probe_auroc(mean: f64, margin: f64) -> Self {
        if mean > 0.5 + margin {
            Self::Degrade
        } else if mean < 0.5 - margin {
            Self::Gain
        } else {
            Self::Stable
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Degrade => "degrade",
            Self::Gain => "gain",
            Self::Stable => "stable",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferReport {
    pub detector: String,
    pub general_auroc: f64,
    pub personalized_auroc: f64,
    pub gap: f64,
    pub probe_auroc_mean: f64,
    pub probe_aurocs: Vec<f64>,
    pub verdict: Verdict,
}

impl TransferReport {
    pub fn new(detector: &str, gap: GapReport, probes: ProbeEvaluation, margin: f64) -> Self {
        Self {
            detector: detector.to_owned(),
            general_auroc: gap.general_auroc,
            personalized_auroc: gap.personalized_auroc,
            gap: gap.gap,
            probe_auroc_mean: probes.mean,
            verdict: Verdict::from_probe_auroc(probes.mean, margin),
            probe_aurocs: probes.per_probe,
        }
    }

    pub fn inputs(&self) -> DetectorInputs {
        DetectorInputs {
            name: self.detector.clone(),
            gap: self.gap,
            probe_aurocs: self.probe_aurocs.clone(),
        }
    }
}
