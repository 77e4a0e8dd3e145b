use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{gen_score_corpus, PlantedDetector, ProbeEmbedderConfig, Reliance, RelianceTable, SynthConfig, SynthCorpus, SynthEmbedder};
use crate::corpus_io::{partition_subsets, ActivationTable, ClassLabel, DomainLabel, Subset, TextRecord};
use crate::inversion::{invert, train_probe_classifiers, ClassSets, DomainPair, InvertedDirection, PairingMode};
use crate::seeding;
use crate::stats::LogisticConfig;
use crate::stylocheck::{
    ablation_probe_count, build_probe_pool, evaluate_on_probes, stylocheck_run, transfer_gap, AblationRow, DetectorInputs,
    ProbeDataset, ProbeParams, RunSummary, StyloError, TransferReport,
};

/// End-to-end StyloCheck run on a synthetic corpus with a family of planted
/// detectors that differ only in their reliance on the inverted direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub synth: SynthConfig,
    pub embedder: ProbeEmbedderConfig,
    pub probes: ProbeParams,
    pub pairing: PairingMode,
    pub logistic: LogisticConfig,
    pub beta_inv: Vec<f64>,
    pub beta_cls: f64,
    pub detector_noise: f64,
    pub ablation_counts: Vec<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            synth: SynthConfig::default(),
            embedder: ProbeEmbedderConfig::default(),
            probes: ProbeParams::default(),
            pairing: PairingMode::default(),
            logistic: LogisticConfig::default(),
            beta_inv: vec![-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0],
            beta_cls: 1.0,
            detector_noise: 0.5,
            ablation_counts: vec![1, 2, 3, 5, 10],
        }
    }
}

impl ExperimentConfig {
    pub fn detectors(&self, corpus: &SynthCorpus) -> Vec<PlantedDetector> {
        self.beta_inv
            .iter()
            .map(|&b| {
                let r = Reliance {
                    beta_inv: b,
                    beta_cls: self.beta_cls,
                    noise: self.detector_noise,
                };
                PlantedDetector::new(format!("planted{b:+}"), r, &corpus.truth.planted, self.synth.seed)
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub corpus: SynthCorpus,
    pub direction: InvertedDirection,
    pub probes: Vec<ProbeDataset>,
    pub reports: Vec<TransferReport>,
    pub summary: RunSummary,
    pub ablation: Vec<AblationRow>,
}

/// Pools every activation of the corpus into its domain/class cell.
pub fn pooled_pair(records: &[TextRecord], table: &ActivationTable) -> Result<DomainPair, StyloError> {
    let mut pair = DomainPair {
        general: ClassSets { mgt: vec![], hwt: vec![] },
        personalized: ClassSets { mgt: vec![], hwt: vec![] },
    };
    for r in records {
        let x = table.require(r)?.to_vec();
        let cell = match r.domain_label {
            DomainLabel::General => &mut pair.general,
            DomainLabel::Personalized => &mut pair.personalized,
        };
        match r.class_label {
            ClassLabel::Mgt => cell.mgt.push(x),
            ClassLabel::Hwt => cell.hwt.push(x),
        }
    }
    Ok(pair)
}

pub fn split_domains(records: &[TextRecord]) -> Result<(Vec<Subset>, Vec<Subset>), StyloError> {
    let (g, p): (Vec<Subset>, Vec<Subset>) = partition_subsets(records)?
        .into_values()
        .partition(|s| s.domain == DomainLabel::General);
    Ok((g, p))
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Experiment, StyloError> {
    let corpus = gen_score_corpus(&cfg.synth, &RelianceTable::new())
        .map_err(|e| StyloError::Precondition(e.to_string()))?;
    let records: Vec<TextRecord> = corpus.records().cloned().collect();
    let table = corpus.store.table(&cfg.synth.layout.module_tag);
    let pair = pooled_pair(&records, &table)?;
    let seed = cfg.synth.seed;

    let (_, direction) = invert(&pair.general, &pair.personalized, cfg.pairing, seed)?;
    let classifiers = train_probe_classifiers(&pair, &cfg.logistic)?;
    let embedder = SynthEmbedder::new(
        &corpus.truth.planted,
        &cfg.synth,
        table.clone(),
        cfg.embedder,
        seeding::derive_seed(seed, &[0xe5b]),
    )
    .protecting(&[classifiers.domain.raw_weights(), classifiers.mgt.raw_weights()]);
    let hwts = |d: DomainLabel| -> Vec<&TextRecord> {
        records.iter().filter(|r| r.domain_label == d && r.class_label == ClassLabel::Hwt).collect()
    };
    let probes = build_probe_pool(
        &hwts(DomainLabel::General),
        &hwts(DomainLabel::Personalized),
        &direction.direction,
        "w_star",
        &embedder,
        &classifiers,
        &cfg.probes,
        seeding::derive_seed(seed, &[0x9b0]),
    )?;

    let (general, personalized) = split_domains(&records)?;
    let reports = cfg
        .detectors(&corpus)
        .par_iter()
        .map(|det| {
            let gap = transfer_gap(det, &general, &personalized, Some(&table))?;
            let ev = evaluate_on_probes(det, &probes)?;
            Ok(TransferReport::new(&det.name, gap, ev, cfg.probes.margin))
        })
        .collect::<Result<Vec<_>, StyloError>>()?;
    let inputs: Vec<DetectorInputs> = reports.iter().map(TransferReport::inputs).collect();
    let run_seed = seeding::derive_seed(seed, &[0x5c]);
    let summary = stylocheck_run(&inputs, cfg.probes.probes_per_trial, cfg.probes.trials, run_seed)?;
    let ablation = ablation_probe_count(&inputs, &cfg.ablation_counts, cfg.probes.trials, run_seed)?;
    Ok(Experiment {
        corpus,
        direction,
        probes,
        reports,
        summary,
        ablation,
    })
}
