use std::path::PathBuf;

use anyhow::Result;
use log::debug;

use ivtr_core::corpus_io::partition_subsets;
use ivtr_core::detectors::{evaluate_detector, Detector};

use crate::config::RunConfig;
use crate::io;
use crate::tables::{self, DetectRow};

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    manifest: PathBuf,
    /// Output CSV.
    #[arg(long)]
    out: PathBuf,
}

pub fn run(args: &Args, cfg: &RunConfig) -> Result<()> {
    let corpus = io::load(&args.manifest)?;
    let subsets = partition_subsets(&corpus.records)?;
    let mut rows = Vec::new();
    for &kind in &cfg.detectors {
        let det = Detector::new(kind, cfg.detector.clone());
        for s in subsets.values() {
            let ev = evaluate_detector(&det, s, None)?;
            for x in &ev.excluded {
                debug!("{kind} excluded {}: {}", x.text_id, x.reason);
            }
            rows.push(DetectRow {
                detector: kind.name().into(),
                subdomain: s.key.subdomain.clone(),
                generator: s.key.generator.clone(),
                auroc: ev.auroc,
                n_excluded: ev.n_excluded,
            });
        }
    }
    tables::write(&args.out, &rows)
}
