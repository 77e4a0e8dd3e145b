use std::path::PathBuf;

use anyhow::{bail, Result};
use rand::seq::SliceRandom;
use rayon::prelude::*;

use ivtr_core::corpus_io::{ActivationTable, Corpus, DomainLabel};
use ivtr_core::seeding::{self, fnv1a};
use ivtr_core::stats::{auroc_split, train_logistic, LinearClassifier};

use crate::config::RunConfig;
use crate::io;
use crate::tables::{self, SweepRow};

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    manifest: PathBuf,
    /// Output CSV.
    #[arg(long)]
    out: PathBuf,
    /// Module tags to sweep; every tag in the store when omitted.
    #[arg(long, value_delimiter = ',')]
    tags: Vec<String>,
    /// Permute labels before splitting, as a null control.
    #[arg(long)]
    shuffle_labels: bool,
}

pub fn run(args: &Args, cfg: &RunConfig) -> Result<()> {
    let corpus = io::load(&args.manifest)?;
    let store = corpus.activation_store()?;
    let tags = if args.tags.is_empty() { store.module_tags() } else { args.tags.clone() };
    let mut jobs = Vec::new();
    for tag in &tags {
        let table = store.table(tag);
        if table.vectors.is_empty() {
            bail!("no activations under tag {tag:?}");
        }
        for domain in [DomainLabel::General, DomainLabel::Personalized] {
            jobs.push((tag.clone(), table.clone(), domain));
        }
    }
    let rows = jobs
        .par_iter()
        .map(|(tag, table, domain)| sweep_one(&corpus, tag, table, *domain, args.shuffle_labels, cfg))
        .collect::<Result<Vec<_>>>()?;
    tables::write(&args.out, &rows)
}

fn sweep_one(
    corpus: &Corpus,
    tag: &str,
    table: &ActivationTable,
    domain: DomainLabel,
    shuffle_labels: bool,
    cfg: &RunConfig,
) -> Result<SweepRow> {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for r in corpus.records.iter().filter(|r| r.domain_label == domain) {
        x.push(table.require(r)?.to_vec());
        y.push(r.is_mgt());
    }
    let mut rng = seeding::rng(cfg.seed, &[fnv1a(tag.as_bytes()), domain as u64]);
    if shuffle_labels {
        y.shuffle(&mut rng);
    }
    // Stratified split so both classes reach the holdout.
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in [true, false] {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        idx.shuffle(&mut rng);
        let n_test = ((idx.len() as f64) * cfg.holdout_fraction).round() as usize;
        if n_test == 0 || n_test == idx.len() {
            bail!("{domain} under {tag:?} has {} texts of one class: too few for a holdout", idx.len());
        }
        test.extend_from_slice(&idx[..n_test]);
        train.extend_from_slice(&idx[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    let pick = |ix: &[usize]| -> (Vec<Vec<f64>>, Vec<bool>) { ix.iter().map(|&i| (x[i].clone(), y[i])).unzip() };
    let (xtr, ytr) = pick(&train);
    let (xte, yte) = pick(&test);
    let c = train_logistic(&xtr, &ytr, &cfg.logistic)?;
    Ok(SweepRow {
        module_tag: tag.to_owned(),
        domain: domain.to_string(),
        labels: if shuffle_labels { "shuffled" } else { "true" }.into(),
        n_train: train.len(),
        n_test: test.len(),
        train_auroc: auroc_of(&c, &xtr, &ytr)?,
        holdout_auroc: auroc_of(&c, &xte, &yte)?,
    })
}

fn auroc_of(c: &LinearClassifier, x: &[Vec<f64>], y: &[bool]) -> Result<f64> {
    let (mut pos, mut neg) = (Vec::new(), Vec::new());
    for (xi, &yi) in x.iter().zip(y) {
        if yi { &mut pos } else { &mut neg }.push(c.decision(xi));
    }
    Ok(auroc_split(&pos, &neg)?)
}
