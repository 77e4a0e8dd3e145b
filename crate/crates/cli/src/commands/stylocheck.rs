use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use log::info;
use rayon::prelude::*;
use serde::Serialize;

use ivtr_core::corpus_io::{load_corpus, DomainLabel, TextRecord};
use ivtr_core::detectors::{Detector, TextDetector};
use ivtr_core::inversion::{train_probe_classifiers, ProbeClassifiers};
use ivtr_core::seeding::derive_seed;
use ivtr_core::stylocheck::{
    ablation_probe_count, build_probe_pool, evaluate_on_probes, probe_plan, probe_variants, stylocheck_run, transfer_gap,
    DetectorInputs, Embedder, ProbeDataset, StoreEmbedder, TransferReport,
};
use ivtr_core::synthlab::{pooled_pair, split_domains, truth_from_manifest, PlantedDetector, Reliance, SynthEmbedder, SynthRescorer, SynthTruth};

use crate::config::RunConfig;
use crate::io::{self, DirectionFile};
use crate::tables::{self, AblationRow, ProbeAurocRow, ProbeRow, TransferRow, TrialRow};

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    manifest: PathBuf,
    /// direction.json written by `invert`.
    #[arg(long)]
    direction: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Evaluate the planted detector family instead of the registry detectors
    /// (synthetic corpora only).
    #[arg(long)]
    planted: bool,
    /// Manifest of externally scored probe variants. Without it, a corpus
    /// that is not synthetic only gets a needs_scoring.jsonl worklist.
    #[arg(long)]
    scored_variants: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct SummaryFile {
    detectors: usize,
    probes: usize,
    probes_per_trial: usize,
    trials: usize,
    undefined_trials: usize,
    frac_r_above_05: f64,
    frac_r_above_07: f64,
    mean_r: Option<f64>,
    median_r: Option<f64>,
    std_r: Option<f64>,
}

pub fn run(args: &Args, cfg: &RunConfig) -> Result<()> {
    let corpus = io::load(&args.manifest)?;
    let dir = DirectionFile::read(&args.direction)?;
    let table = corpus.activation_store()?.table(&dir.module_tag);
    let truth = truth_from_manifest(&corpus.manifest);
    if args.planted && truth.is_none() {
        bail!("--planted needs a synthetic corpus");
    }
    let general = io::hwts(&corpus.records, DomainLabel::General);
    let personalized = io::hwts(&corpus.records, DomainLabel::Personalized);
    let pool_seed = derive_seed(cfg.seed, &[0x9b0]);
    io::out_dir(&args.out)?;

    let probes = match (&args.scored_variants, &truth) {
        (None, None) => {
            let mut worklist = Vec::new();
            for p in probe_plan(general.len(), personalized.len(), &cfg.probes, pool_seed) {
                worklist.extend(probe_variants(&p.id, general[p.general], personalized[p.personalized], &cfg.probes, p.seed)?);
            }
            let n = io::write_jsonl(&args.out.join("needs_scoring.jsonl"), &worklist)?;
            println!("{n} variants need scoring: {}", args.out.join("needs_scoring.jsonl").display());
            return Ok(());
        }
        (Some(path), _) => {
            let pair = pooled_pair(&corpus.records, &table)?;
            let classifiers = train_probe_classifiers(&pair, &cfg.logistic)?;
            scored_pool(path, &dir, &general, &personalized, &classifiers, cfg, pool_seed)?
        }
        (None, Some(truth)) => {
            let pair = pooled_pair(&corpus.records, &table)?;
            let classifiers = train_probe_classifiers(&pair, &cfg.logistic)?;
            let embedder = SynthEmbedder::new(&truth.planted, &truth.config, table.clone(), cfg.embedder, derive_seed(cfg.seed, &[0xe5b]))
                .protecting(&[classifiers.domain.raw_weights(), classifiers.mgt.raw_weights()]);
            let mut probes = pool(&embedder, &dir, &general, &personalized, &classifiers, cfg, pool_seed)?;
            let rescorer = SynthRescorer::new(truth.planted.clone(), truth.reliance.clone(), truth.config.seed);
            probes.par_iter_mut().for_each(|p| {
                let acts = &p.activations;
                for r in p.positives.iter_mut().chain(p.negatives.iter_mut()) {
                    rescorer.rescore(r, acts.get(&r.id).expect("selected variants carry activations"));
                }
            });
            probes
        }
    };
    info!("{} probes", probes.len());

    let detectors: Vec<Box<dyn TextDetector>> = match (&truth, args.planted) {
        (Some(truth), true) => planted_family(truth, cfg),
        _ => cfg
            .detectors
            .iter()
            .map(|&k| Box::new(Detector::new(k, cfg.detector.clone())) as Box<dyn TextDetector>)
            .collect(),
    };
    let (gen_subsets, pers_subsets) = split_domains(&corpus.records)?;
    let reports = detectors
        .par_iter()
        .map(|det| {
            let gap = transfer_gap(det.as_ref(), &gen_subsets, &pers_subsets, Some(&table))?;
            let ev = evaluate_on_probes(det.as_ref(), &probes)?;
            Ok(TransferReport::new(det.name(), gap, ev, cfg.probes.margin))
        })
        .collect::<Result<Vec<_>>>()?;
    let inputs: Vec<DetectorInputs> = reports.iter().map(TransferReport::inputs).collect();
    let run_seed = derive_seed(cfg.seed, &[0x5c]);
    let summary = stylocheck_run(&inputs, cfg.probes.probes_per_trial, cfg.probes.trials, run_seed)?;
    let ablation = ablation_probe_count(&inputs, &cfg.ablation_counts, cfg.probes.trials, run_seed)?;

    let out = |name: &str| args.out.join(name);
    let transfer: Vec<TransferRow> = reports
        .iter()
        .map(|r| TransferRow {
            detector: r.detector.clone(),
            general_auroc: r.general_auroc,
            personalized_auroc: r.personalized_auroc,
            gap: r.gap,
            probe_auroc_mean: r.probe_auroc_mean,
            verdict: r.verdict.as_str().into(),
        })
        .collect();
    tables::write(&out("transfer.csv"), &transfer)?;
    let per_probe: Vec<ProbeAurocRow> = reports
        .iter()
        .flat_map(|r| {
            probes.iter().zip(&r.probe_aurocs).map(|(p, &auroc)| ProbeAurocRow {
                detector: r.detector.clone(),
                probe_id: p.id.clone(),
                auroc,
            })
        })
        .collect();
    tables::write(&out("probe_aurocs.csv"), &per_probe)?;
    let probe_rows: Vec<ProbeRow> = probes
        .iter()
        .map(|p| ProbeRow {
            probe_id: p.id.clone(),
            general_source: p.source_ids.0.clone(),
            personalized_source: p.source_ids.1.clone(),
            min_positive: p.min_positive(),
            max_negative: p.max_negative(),
            domain_probe_auroc: p.leakage.domain_probe_auroc,
            mgt_probe_auroc: p.leakage.mgt_probe_auroc,
        })
        .collect();
    tables::write(&out("probes.csv"), &probe_rows)?;
    let trials: Vec<TrialRow> = summary
        .trial_r
        .iter()
        .zip(&summary.members)
        .enumerate()
        .map(|(trial, (&r, m))| TrialRow {
            trial,
            r,
            members: m.iter().map(|&i| probes[i].id.as_str()).collect::<Vec<_>>().join(";"),
        })
        .collect();
    tables::write(&out("trials.csv"), &trials)?;
    let ablation: Vec<AblationRow> = ablation
        .iter()
        .map(|a| AblationRow {
            count: a.count,
            mean_r: a.mean_r,
            std_r: a.std_r,
            defined_trials: a.defined_trials,
        })
        .collect();
    tables::write(&out("ablation.csv"), &ablation)?;
    io::write_json(
        &out("summary.json"),
        &SummaryFile {
            detectors: reports.len(),
            probes: probes.len(),
            probes_per_trial: summary.probes_per_trial,
            trials: summary.trial_r.len(),
            undefined_trials: summary.undefined_trials,
            frac_r_above_05: summary.frac_r_above_05,
            frac_r_above_07: summary.frac_r_above_07,
            mean_r: summary.mean_r,
            median_r: summary.median_r,
            std_r: summary.std_r,
        },
    )?;
    for r in &reports {
        println!("{}\tgap {:.4}\tprobe {:.4}\t{}", r.detector, r.gap, r.probe_auroc_mean, r.verdict.as_str());
    }
    match summary.median_r {
        Some(m) => println!("median r {m:.4}, fraction r > 0.5 {:.2}", summary.frac_r_above_05),
        None => println!("no trial had a defined r"),
    }
    Ok(())
}

fn pool(
    embedder: &dyn Embedder,
    dir: &DirectionFile,
    general: &[&TextRecord],
    personalized: &[&TextRecord],
    classifiers: &ProbeClassifiers,
    cfg: &RunConfig,
    seed: u64,
) -> Result<Vec<ProbeDataset>> {
    Ok(build_probe_pool(general, personalized, &dir.direction, "w_star", embedder, classifiers, &cfg.probes, seed)?)
}

/// Probes over externally scored variants, looked up by id.
fn scored_pool(
    path: &Path,
    dir: &DirectionFile,
    general: &[&TextRecord],
    personalized: &[&TextRecord],
    classifiers: &ProbeClassifiers,
    cfg: &RunConfig,
    seed: u64,
) -> Result<Vec<ProbeDataset>> {
    let scored = load_corpus(path)?;
    let embedder = StoreEmbedder {
        table: scored.activation_store()?.table(&dir.module_tag),
    };
    let mut probes = pool(&embedder, dir, general, personalized, classifiers, cfg, seed)?;
    let by_id: BTreeMap<&str, &TextRecord> = scored.records.iter().map(|r| (r.id.as_str(), r)).collect();
    for p in &mut probes {
        for r in p.positives.iter_mut().chain(p.negatives.iter_mut()) {
            if let Some(s) = by_id.get(r.id.as_str()) {
                *r = (*s).clone();
            }
        }
    }
    Ok(probes)
}

fn planted_family(truth: &SynthTruth, cfg: &RunConfig) -> Vec<Box<dyn TextDetector>> {
    cfg.planted
        .beta_inv
        .iter()
        .map(|&b| {
            let r = Reliance {
                beta_inv: b,
                beta_cls: cfg.planted.beta_cls,
                noise: cfg.planted.noise,
            };
            Box::new(PlantedDetector::new(format!("planted{b:+}"), r, &truth.planted, truth.config.seed)) as Box<dyn TextDetector>
        })
        .collect()
}
