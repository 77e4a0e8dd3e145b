use std::path::PathBuf;

use anyhow::Result;
use log::info;

use ivtr_core::corpus_io::write_corpus;
use ivtr_core::synthlab::gen_score_corpus;

use crate::config::RunConfig;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Output directory; receives manifest.json, record files and the store.
    #[arg(long)]
    out: PathBuf,
}

pub fn run(args: &Args, cfg: &RunConfig) -> Result<()> {
    let corpus = gen_score_corpus(&cfg.synth, &cfg.reliance_table()?)?;
    let path = write_corpus(&args.out, &corpus.manifest, &corpus.files, Some(&corpus.store))?;
    info!("{} records, d = {}", corpus.records().count(), cfg.synth.d);
    println!("{}", path.display());
    Ok(())
}
