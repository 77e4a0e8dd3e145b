use std::path::PathBuf;

use anyhow::{bail, Result};
use rayon::prelude::*;

use ivtr_core::corpus_io::{ClassLabel, TextRecord};
use ivtr_core::seeding::{derive_seed, fnv1a};
use ivtr_core::shuffler::{gen_permutation, tau_from_inversions, tau_grid, variant_record, ShuffleSpec};
use ivtr_core::stats::inversion_count;

use crate::config::RunConfig;
use crate::io;
use crate::tables::{self, ShuffleRow};

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    manifest: PathBuf,
    /// Output directory; receives variants.jsonl and shuffle.csv.
    #[arg(long)]
    out: PathBuf,
    /// Source text ids; every HWT when omitted.
    #[arg(long, value_delimiter = ',')]
    ids: Vec<String>,
    /// Points on the tau grid over [-1, 1].
    #[arg(long, default_value_t = 41)]
    count: usize,
}

pub fn run(args: &Args, cfg: &RunConfig) -> Result<()> {
    let corpus = io::load(&args.manifest)?;
    let sources: Vec<&TextRecord> = if args.ids.is_empty() {
        corpus.records.iter().filter(|r| r.class_label == ClassLabel::Hwt).collect()
    } else {
        let mut out = Vec::with_capacity(args.ids.len());
        for id in &args.ids {
            match corpus.records.iter().find(|r| &r.id == id) {
                Some(r) => out.push(r),
                None => bail!("no text with id {id:?}"),
            }
        }
        out
    };
    let grid = tau_grid(args.count, -1.0, 1.0)?;
    let per_source = sources
        .par_iter()
        .map(|src| {
            let mut out = Vec::with_capacity(grid.len());
            for (vi, &tau) in grid.iter().enumerate() {
                let spec = ShuffleSpec::new(src.tokens.len(), tau, derive_seed(cfg.seed, &[fnv1a(src.id.as_bytes()), vi as u64]));
                let v = variant_record(src, &spec, vi, None)?;
                let measured = inversion_count(&gen_permutation(&spec)?);
                let row = ShuffleRow {
                    source_id: src.id.clone(),
                    variant_id: v.id.clone(),
                    tau_target: tau,
                    target_inversions: spec.target_inversions(),
                    measured_inversions: measured,
                    achieved_tau: tau_from_inversions(spec.n, measured),
                };
                out.push((v, row));
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;

    io::out_dir(&args.out)?;
    let (variants, rows): (Vec<TextRecord>, Vec<ShuffleRow>) = per_source.into_iter().flatten().unzip();
    io::write_jsonl(&args.out.join("variants.jsonl"), &variants)?;
    tables::write(&args.out.join("shuffle.csv"), &rows)
}
