use std::path::PathBuf;

use anyhow::{bail, Result};

use ivtr_core::corpus_io::partition_subsets;
use ivtr_core::detectors::{Detector, TextDetector};
use ivtr_core::inversion::correlation_study;

use crate::config::RunConfig;
use crate::io::{self, DirectionFile};
use crate::tables::{self, CorrelationRow, FeatvalRow};

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    manifest: PathBuf,
    /// direction.json written by `invert`.
    #[arg(long)]
    direction: PathBuf,
    /// Output directory; receives featval.csv and correlations.csv.
    #[arg(long)]
    out: PathBuf,
}

pub fn run(args: &Args, cfg: &RunConfig) -> Result<()> {
    let corpus = io::load(&args.manifest)?;
    let dir = DirectionFile::read(&args.direction)?;
    let table = corpus.activation_store()?.table(&dir.module_tag);
    if table.vectors.is_empty() {
        bail!("corpus has no activations under tag {:?}", dir.module_tag);
    }
    let subsets: Vec<_> = partition_subsets(&corpus.records)?.into_values().collect();
    let detectors: Vec<Detector> = cfg.detectors.iter().map(|&k| Detector::new(k, cfg.detector.clone())).collect();
    let refs: Vec<&dyn TextDetector> = detectors.iter().map(|d| d as &dyn TextDetector).collect();
    let study = correlation_study(&subsets, &table, &dir.direction, &refs, cfg.diff_normalization)?;

    io::out_dir(&args.out)?;
    let mut rows = Vec::new();
    for (k, det) in detectors.iter().enumerate() {
        for r in &study.table {
            rows.push(FeatvalRow {
                subdomain: r.key.subdomain.clone(),
                generator: r.key.generator.clone(),
                domain: r.domain.to_string(),
                feature_gap: r.feature_gap,
                detector: det.name().into(),
                auroc: r.aurocs[k],
                n_excluded: r.n_excluded[k],
            });
        }
    }
    tables::write(&args.out.join("featval.csv"), &rows)?;
    let corr: Vec<CorrelationRow> = study
        .rows
        .iter()
        .map(|r| CorrelationRow {
            detector: r.detector.clone(),
            rho: r.rho,
            n: r.n,
        })
        .collect();
    tables::write(&args.out.join("correlations.csv"), &corr)
}
