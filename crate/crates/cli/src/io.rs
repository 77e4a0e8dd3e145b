use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use ivtr_core::corpus_io::{load_corpus, ActivationTable, ClassLabel, Corpus, DomainLabel, TextRecord};
use ivtr_core::inversion::FeatureDirection;
use ivtr_core::synthlab::truth_from_manifest;

use crate::config::RunConfig;

pub fn load(manifest: &Path) -> Result<Corpus> {
    load_corpus(manifest).with_context(|| format!("loading corpus {}", manifest.display()))
}

/// The configured tag, else the store's only tag.
pub fn module_tag(corpus: &Corpus, cfg: &RunConfig) -> Result<String> {
    if let Some(t) = &cfg.module_tag {
        return Ok(t.clone());
    }
    if let Some(truth) = truth_from_manifest(&corpus.manifest) {
        return Ok(truth.config.layout.module_tag);
    }
    let tags = corpus.activation_store()?.module_tags();
    match tags.as_slice() {
        [one] => Ok(one.clone()),
        [] => bail!("activation store holds no vectors"),
        _ => bail!("activation store has tags {tags:?}; set module_tag in the config"),
    }
}

pub fn activation_table(corpus: &Corpus, cfg: &RunConfig) -> Result<ActivationTable> {
    let tag = module_tag(corpus, cfg)?;
    Ok(corpus.activation_store()?.table(&tag))
}

pub fn hwts(records: &[TextRecord], domain: DomainLabel) -> Vec<&TextRecord> {
    records
        .iter()
        .filter(|r| r.domain_label == domain && r.class_label == ClassLabel::Hwt)
        .collect()
}

/// Contents of `direction.json` written by `invert`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionFile {
    pub module_tag: String,
    pub direction: FeatureDirection,
    pub lambda_min: f64,
    pub lambda_min_per_quadruple: f64,
    pub rayleigh: f64,
    pub quadruple_count: u64,
    pub degenerate_spectrum: bool,
    pub weak_inversion: bool,
}

impl DirectionFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing direction file {}", path.display()))
    }
}

pub fn out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s).with_context(|| format!("writing {}", path.display()))
}

pub fn write_jsonl<'a>(path: &Path, records: impl IntoIterator<Item = &'a TextRecord>) -> Result<usize> {
    let mut out = String::new();
    let mut n = 0;
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
        n += 1;
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(n)
}
