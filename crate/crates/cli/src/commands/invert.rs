use std::path::PathBuf;

use anyhow::Result;

use ivtr_core::inversion::invert;
use ivtr_core::synthlab::{pooled_pair, truth_from_manifest};

use crate::config::RunConfig;
use crate::io::{self, DirectionFile};
use crate::tables::{self, SpectrumRow};

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    manifest: PathBuf,
    /// Output directory; receives direction.json and spectrum.csv.
    #[arg(long)]
    out: PathBuf,
}

pub fn run(args: &Args, cfg: &RunConfig) -> Result<()> {
    let corpus = io::load(&args.manifest)?;
    let table = io::activation_table(&corpus, cfg)?;
    let pair = pooled_pair(&corpus.records, &table)?;
    let (m, inv) = invert(&pair.general, &pair.personalized, cfg.pairing_mode, cfg.seed)?;

    io::out_dir(&args.out)?;
    let spectrum: Vec<SpectrumRow> = inv
        .spectrum
        .iter()
        .enumerate()
        .map(|(index, &eigenvalue)| SpectrumRow { index, eigenvalue })
        .collect();
    tables::write(&args.out.join("spectrum.csv"), &spectrum)?;
    let file = DirectionFile {
        module_tag: table.module_tag.clone(),
        direction: inv.direction.clone(),
        lambda_min: inv.lambda_min,
        lambda_min_per_quadruple: inv.lambda_min_per_quadruple,
        rayleigh: inv.rayleigh,
        quadruple_count: m.quadruple_count,
        degenerate_spectrum: inv.degenerate_spectrum,
        weak_inversion: inv.weak_inversion,
    };
    io::write_json(&args.out.join("direction.json"), &file)?;

    println!("lambda_min\t{}", inv.lambda_min);
    println!("degenerate_spectrum\t{}", inv.degenerate_spectrum);
    println!("weak_inversion\t{}", inv.weak_inversion);
    println!("orientation_anchor\t{}", inv.direction.orientation_anchor());
    if let Some(truth) = truth_from_manifest(&corpus.manifest) {
        let dot: f64 = inv.direction.vector().iter().zip(&truth.planted.u_inv).map(|(a, b)| a * b).sum();
        println!("abs_cos_planted\t{}", dot.abs());
    }
    Ok(())
}
