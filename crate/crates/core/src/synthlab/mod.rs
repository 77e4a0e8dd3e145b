//! Synthetic corpora with planted geometry.
//!
//! Three orthonormal directions are planted in activation space: `u_inv`
//! (class offset whose sign flips between domains), `u_dom` (domain offset)
//! and `u_cls` (class offset shared by both domains). An activation is
//!
//! ```text
//! x = domain_mean + class_sign * (alpha_domain * u_inv + gamma * u_cls) + noise
//! ```
//!
//! with `class_sign = +1` for MGT, `domain_mean = -/+ delta/2 * u_dom` for
//! general/personalized texts and isotropic Gaussian noise of expected squared
//! norm `sigma^2` (per-coordinate standard deviation `sigma / sqrt(d)`).

mod embedder;
mod experiment;
mod scores;

pub use embedder::{ProbeEmbedderConfig, SynthEmbedder};
pub use experiment::{pooled_pair, run_experiment, split_domains, Experiment, ExperimentConfig};
pub use scores::{
    encode_scores, PlantedDetector, Reliance, RelianceTable, SynthRescorer, SYNTH_K_SAMPLES,
    SYNTHESIZABLE,
};

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus_io::{
    ActivationStore, ActivationVector, ClassLabel, CorpusError, DatasetManifest, DomainLabel,
    ManifestEntry, TextRecord, HUMAN,
};
use crate::detectors::DetectorKind;
use crate::inversion::ClassSets;
use crate::seeding;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synth config: {0}")]
    InvalidConfig(String),
    #[error("unknown detector {0:?}")]
    UnknownDetector(String),
    #[error("detector {0} cannot be driven by constant per-token statistics")]
    NotSynthesizable(DetectorKind),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

/// Subdomain/generator layout of a full synthetic corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthLayout {
    pub general_subdomains: usize,
    pub personalized_subdomains: usize,
    pub generators: usize,
    pub tokens_per_text: usize,
    /// Per-subdomain multiplier on `alpha` drawn from `1 +/- jitter`.
    pub subset_jitter: f64,
    pub module_tag: String,
}

impl Default for SynthLayout {
    fn default() -> Self {
        Self {
            general_subdomains: 3,
            personalized_subdomains: 3,
            generators: 2,
            tokens_per_text: 32,
            subset_jitter: 0.5,
            module_tag: "resid.10".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub d: usize,
    /// Texts per class per domain (per subdomain cell in full corpora).
    pub n_per_cell: usize,
    pub alpha_general: f64,
    pub alpha_personalized: f64,
    pub delta_dom: f64,
    pub gamma_cls: f64,
    pub sigma: f64,
    pub seed: u64,
    pub layout: SynthLayout,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            d: 64,
            n_per_cell: 150,
            alpha_general: 1.0,
            alpha_personalized: -1.0,
            delta_dom: 3.0,
            gamma_cls: 0.5,
            sigma: 1.0,
            seed: 0,
            layout: SynthLayout::default(),
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidConfig(m));
        if self.d < 3 {
            return bad(format!("d = {} cannot hold three orthogonal directions", self.d));
        }
        if self.n_per_cell == 0 {
            return bad("n_per_cell must be positive".into());
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma = {} must be finite and positive", self.sigma));
        }
        let l = &self.layout;
        if l.general_subdomains == 0 || l.personalized_subdomains == 0 || l.generators == 0 {
            return bad("layout needs at least one subdomain per domain and one generator".into());
        }
        if l.tokens_per_text < 2 {
            return bad("tokens_per_text must be at least 2".into());
        }
        if !(0.0..1.0).contains(&l.subset_jitter) {
            return bad(format!("subset_jitter = {} outside [0, 1)", l.subset_jitter));
        }
        Ok(())
    }

    pub fn alpha(&self, domain: DomainLabel) -> f64 {
        match domain {
            DomainLabel::General => self.alpha_general,
            DomainLabel::Personalized => self.alpha_personalized,
        }
    }
}

/// The planted unit directions, pairwise orthogonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedDirections {
    pub u_inv: Vec<f64>,
    pub u_dom: Vec<f64>,
    pub u_cls: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gram-Schmidt on seeded Gaussian draws.
pub fn planted_directions(d: usize, seed: u64) -> PlantedDirections {
    let mut rng = seeding::rng(seed, &[0x91a7]);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(3);
    while basis.len() < 3 {
        let mut v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        // two passes keep the result orthogonal to rounding level
        for _ in 0..2 {
            for b in &basis {
                let p = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-6 {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    let u_cls = basis.pop().expect("three vectors");
    let u_dom = basis.pop().expect("three vectors");
    let u_inv = basis.pop().expect("three vectors");
    PlantedDirections { u_inv, u_dom, u_cls }
}

impl PlantedDirections {
    pub fn dim(&self) -> usize {
        self.u_inv.len()
    }

    /// Noise-free activation of a text.
    pub fn mean(&self, cfg: &SynthConfig, domain: DomainLabel, mgt: bool, alpha: f64) -> Vec<f64> {
        let dsign = match domain {
            DomainLabel::General => -0.5,
            DomainLabel::Personalized => 0.5,
        };
        let csign = if mgt { 1.0 } else { -1.0 };
        (0..self.dim())
            .map(|i| {
                dsign * cfg.delta_dom * self.u_dom[i]
                    + csign * (alpha * self.u_inv[i] + cfg.gamma_cls * self.u_cls[i])
            })
            .collect()
    }
}

fn sample(mean: &[f64], sigma: f64, rng: &mut impl Rng) -> Vec<f64> {
    let s = sigma / (mean.len() as f64).sqrt();
    mean.iter()
        .map(|m| {
            let z: f64 = rng.sample(StandardNormal);
            // stored activations are f32 on disk
            f64::from((m + s * z) as f32)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthActivations {
    pub planted: PlantedDirections,
    pub general: ClassSets,
    pub personalized: ClassSets,
}

/// Four labeled sets of `n_per_cell` activations.
pub fn gen_activation_corpus(cfg: &SynthConfig) -> Result<SynthActivations, SynthError> {
    cfg.validate()?;
    let planted = planted_directions(cfg.d, cfg.seed);
    let cells = [
        (DomainLabel::General, true),
        (DomainLabel::General, false),
        (DomainLabel::Personalized, true),
        (DomainLabel::Personalized, false),
    ];
    let mut sets: Vec<Vec<Vec<f64>>> = cells
        .par_iter()
        .enumerate()
        .map(|(c, &(domain, mgt))| {
            let mean = planted.mean(cfg, domain, mgt, cfg.alpha(domain));
            let mut rng = seeding::rng(cfg.seed, &[0xce11, c as u64]);
            (0..cfg.n_per_cell).map(|_| sample(&mean, cfg.sigma, &mut rng)).collect()
        })
        .collect();
    let s_hwt = sets.pop().expect("four cells");
    let s_mgt = sets.pop().expect("four cells");
    let g_hwt = sets.pop().expect("four cells");
    let g_mgt = sets.pop().expect("four cells");
    Ok(SynthActivations {
        planted,
        general: ClassSets { mgt: g_mgt, hwt: g_hwt },
        personalized: ClassSets { mgt: s_mgt, hwt: s_hwt },
    })
}

/// Ground truth recorded in the manifest metadata of synthetic corpora.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthTruth {
    pub config: SynthConfig,
    pub planted: PlantedDirections,
    pub reliance: RelianceTable,
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub manifest: DatasetManifest,
    pub files: Vec<Vec<TextRecord>>,
    pub store: ActivationStore,
    pub truth: SynthTruth,
}

impl SynthCorpus {
    pub fn records(&self) -> impl Iterator<Item = &TextRecord> {
        self.files.iter().flatten()
    }
}

/// Synthetic tokens `"{text_id}#{position}"`, so a shuffled copy still
/// records where each token came from.
pub fn synth_tokens(id: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{id}#{i}")).collect()
}

fn subdomain_names(cfg: &SynthConfig) -> Vec<(DomainLabel, String)> {
    let l = &cfg.layout;
    (0..l.general_subdomains)
        .map(|i| (DomainLabel::General, format!("gen{i}")))
        .chain((0..l.personalized_subdomains).map(|i| (DomainLabel::Personalized, format!("per{i}"))))
        .collect()
}

/// Full corpus: per subdomain `n_per_cell` HWTs and, per generator,
/// `n_per_cell` MGTs, with activations and synthetic token scores driven by
/// the reliance table.
pub fn gen_score_corpus(cfg: &SynthConfig, reliance: &RelianceTable) -> Result<SynthCorpus, SynthError> {
    cfg.validate()?;
    scores::check_table(reliance)?;
    let planted = planted_directions(cfg.d, cfg.seed);
    let rescorer = SynthRescorer::new(planted.clone(), reliance.clone(), cfg.seed);
    let l = &cfg.layout;
    let n = cfg.n_per_cell;

    let mut entries = Vec::new();
    let mut jobs = Vec::new();
    for (si, (domain, sub)) in subdomain_names(cfg).into_iter().enumerate() {
        let mut jr = seeding::rng(cfg.seed, &[0x717e, si as u64]);
        let alpha = cfg.alpha(domain) * (1.0 + l.subset_jitter * jr.random_range(-1.0..=1.0));
        for g in 0..l.generators {
            let generator = format!("g{g}");
            let with_hwt = g == 0;
            entries.push(ManifestEntry {
                path: format!("{sub}__{generator}.jsonl").into(),
                count: if with_hwt { 2 * n } else { n },
                domain_label: domain,
                subdomain: sub.clone(),
                generator: generator.clone(),
            });
            jobs.push((domain, sub.clone(), generator, alpha, with_hwt));
        }
    }

    let built: Vec<Vec<(TextRecord, Vec<f64>)>> = jobs
        .par_iter()
        .map(|(domain, sub, generator, alpha, with_hwt)| {
            let mut out = Vec::new();
            let classes: &[bool] = if *with_hwt { &[true, false] } else { &[true] };
            for &mgt in classes {
                let gen_name = if mgt { generator.as_str() } else { HUMAN };
                let mean = planted.mean(cfg, *domain, mgt, *alpha);
                for i in 0..n {
                    let id = format!("{sub}-{gen_name}-{i:04}");
                    let mut rng = seeding::rng_for_key(cfg.seed, &id);
                    let x = sample(&mean, cfg.sigma, &mut rng);
                    let mut r = TextRecord {
                        id: id.clone(),
                        tokens: synth_tokens(&id, l.tokens_per_text),
                        class_label: if mgt { ClassLabel::Mgt } else { ClassLabel::Hwt },
                        domain_label: *domain,
                        subdomain: sub.clone(),
                        generator: gen_name.into(),
                        scores: None,
                        activation_ref: Some(id),
                        needs_scoring: false,
                        variant: None,
                    };
                    rescorer.rescore(&mut r, &x);
                    out.push((r, x));
                }
            }
            out
        })
        .collect();

    let mut store = ActivationStore::new(cfg.d);
    let mut files = Vec::with_capacity(built.len());
    for file in built {
        let mut records = Vec::with_capacity(file.len());
        for (r, x) in file {
            store.push(ActivationVector {
                text_id: r.id.clone(),
                module_tag: l.module_tag.clone(),
                vector: x,
            })?;
            records.push(r);
        }
        files.push(records);
    }
    let truth = SynthTruth {
        config: cfg.clone(),
        planted,
        reliance: reliance.clone(),
    };
    let mut manifest = DatasetManifest::new(entries);
    manifest.d = Some(cfg.d);
    manifest.k_samples = Some(SYNTH_K_SAMPLES);
    manifest.metadata = Some(serde_json::json!({ "synthlab": truth }));
    Ok(SynthCorpus {
        manifest,
        files,
        store,
        truth,
    })
}

/// Reads the planted truth back from a synthetic manifest.
pub fn truth_from_manifest(m: &DatasetManifest) -> Option<SynthTruth> {
    let v = m.metadata.as_ref()?.get("synthlab")?;
    serde_json::from_value(v.clone()).ok()
}
