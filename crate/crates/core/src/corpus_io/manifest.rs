use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::ops::Range;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::store::{read_store, write_store, ActivationStore};
use super::{CorpusError, DomainLabel, TextRecord, HUMAN, SCHEMA_VERSION};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Record file, relative to the manifest directory.
    pub path: PathBuf,
    pub count: usize,
    pub domain_label: DomainLabel,
    pub subdomain: String,
    /// MGT generator of this file; records may also be `"human"`.
    pub generator: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub schema_version: u32,
    pub entries: Vec<ManifestEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub activation_store: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    /// Number of sampled log-probs per position, constant per corpus.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_samples: Option<usize>,
    /// Free-form producer metadata (synthetic corpora record their planted truth here).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<serde_json::Value>,
}

impl DatasetManifest {
    pub fn new(entries: Vec<ManifestEntry>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            entries,
            activation_store: None,
            d: None,
            k_samples: None,
            metadata: None,
        }
    }

    fn check_entries(&self) -> Result<(), CorpusError> {
        let mut seen = HashSet::new();
        for e in &self.entries {
            if !seen.insert((&e.subdomain, &e.generator)) {
                return Err(CorpusError::DuplicateEntry {
                    subdomain: e.subdomain.clone(),
                    generator: e.generator.clone(),
                });
            }
        }
        Ok(())
    }
}

/// A validated, immutable corpus.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub manifest: DatasetManifest,
    pub records: Vec<TextRecord>,
    /// `records[entry_ranges[i]]` came from `manifest.entries[i]`.
    pub entry_ranges: Vec<Range<usize>>,
    pub activations: Option<ActivationStore>,
    pub base_dir: PathBuf,
}

impl Corpus {
    pub fn entry_records(&self, i: usize) -> &[TextRecord] {
        &self.records[self.entry_ranges[i].clone()]
    }

    pub fn activation_store(&self) -> Result<&ActivationStore, CorpusError> {
        self.activations.as_ref().ok_or_else(|| CorpusError::Store {
            path: self.base_dir.clone(),
            reason: "manifest declares no activation store".into(),
        })
    }
}

fn load_entry(base: &Path, entry: &ManifestEntry, k: Option<usize>) -> Result<Vec<TextRecord>, CorpusError> {
    let path = base.join(&entry.path);
    let text = fs::read_to_string(&path).map_err(|e| CorpusError::io(&path, e))?;
    let mut records = Vec::with_capacity(entry.count);
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: TextRecord = serde_json::from_str(line).map_err(|e| CorpusError::Parse {
            path: path.clone(),
            line: lineno + 1,
            message: e.to_string(),
        })?;
        record.validate(k)?;
        if record.domain_label != entry.domain_label {
            return Err(CorpusError::invariant(
                &record.id,
                "domain_label",
                format!("{} in a {} entry", record.domain_label, entry.domain_label),
            ));
        }
        if record.subdomain != entry.subdomain {
            return Err(CorpusError::invariant(
                &record.id,
                "subdomain",
                format!("{:?} in entry for {:?}", record.subdomain, entry.subdomain),
            ));
        }
        if record.generator != entry.generator && record.generator != HUMAN {
            return Err(CorpusError::invariant(
                &record.id,
                "generator",
                format!("{:?} in entry for {:?}", record.generator, entry.generator),
            ));
        }
        records.push(record);
    }
    if records.len() != entry.count {
        return Err(CorpusError::CountMismatch {
            file: path,
            expected: entry.count,
            found: records.len(),
        });
    }
    Ok(records)
}

/// Loads and validates a corpus. Files are validated in parallel; the first
/// error in manifest order is reported.
pub fn load_corpus(manifest_path: &Path) -> Result<Corpus, CorpusError> {
    let text = fs::read_to_string(manifest_path).map_err(|e| CorpusError::io(manifest_path, e))?;
    let probe: serde_json::Value = serde_json::from_str(&text).map_err(|e| CorpusError::Parse {
        path: manifest_path.to_owned(),
        line: e.line(),
        message: e.to_string(),
    })?;
    if let Some(v) = probe.get("schema_version").and_then(serde_json::Value::as_u64) {
        if v != u64::from(SCHEMA_VERSION) {
            return Err(CorpusError::SchemaVersionMismatch {
                found: u32::try_from(v).unwrap_or(u32::MAX),
                supported: SCHEMA_VERSION,
            });
        }
    }
    let manifest: DatasetManifest = serde_json::from_value(probe).map_err(|e| CorpusError::Parse {
        path: manifest_path.to_owned(),
        line: 0,
        message: e.to_string(),
    })?;
    manifest.check_entries()?;
    let base = manifest_path.parent().unwrap_or(Path::new(".")).to_owned();

    let loaded: Vec<Result<Vec<TextRecord>, CorpusError>> = manifest
        .entries
        .par_iter()
        .map(|e| load_entry(&base, e, manifest.k_samples))
        .collect();

    let mut records = Vec::new();
    let mut entry_ranges = Vec::with_capacity(loaded.len());
    for chunk in loaded {
        let chunk = chunk?;
        let start = records.len();
        records.extend(chunk);
        entry_ranges.push(start..records.len());
    }

    let mut ids = HashSet::with_capacity(records.len());
    for r in &records {
        if !ids.insert(r.id.as_str()) {
            return Err(CorpusError::invariant(&r.id, "id", "duplicate id"));
        }
    }

    let activations = match &manifest.activation_store {
        Some(rel) => {
            let store = read_store(&base.join(rel))?;
            if let Some(d) = manifest.d {
                if d != store.dim() {
                    return Err(CorpusError::Store {
                        path: base.join(rel),
                        reason: format!("manifest declares d = {d}, store has {}", store.dim()),
                    });
                }
            }
            Some(store)
        }
        None => None,
    };
    let known: BTreeSet<&str> = activations
        .as_ref()
        .map(|s| s.iter().map(|(e, _)| e.text_id.as_str()).collect())
        .unwrap_or_default();
    for r in &records {
        if let Some(aref) = &r.activation_ref {
            if !known.contains(aref.as_str()) {
                return Err(CorpusError::invariant(
                    &r.id,
                    "activation_ref",
                    format!("{aref:?} not present in the activation store"),
                ));
            }
        }
    }

    Ok(Corpus {
        manifest,
        records,
        entry_ranges,
        activations,
        base_dir: base,
    })
}

/// Writes a manifest (as `manifest.json`), one JSONL file per entry and the
/// optional activation store into `dir`. Serialization is canonical: field
/// order follows the type definitions and floats use shortest round-trip form.
pub fn write_corpus(
    dir: &Path,
    manifest: &DatasetManifest,
    files: &[Vec<TextRecord>],
    activations: Option<&ActivationStore>,
) -> Result<PathBuf, CorpusError> {
    assert_eq!(manifest.entries.len(), files.len(), "one record list per manifest entry");
    manifest.check_entries()?;
    fs::create_dir_all(dir).map_err(|e| CorpusError::io(dir, e))?;
    for (entry, records) in manifest.entries.iter().zip(files) {
        let path = dir.join(&entry.path);
        if records.len() != entry.count {
            return Err(CorpusError::CountMismatch {
                file: path,
                expected: entry.count,
                found: records.len(),
            });
        }
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CorpusError::io(parent, e))?;
        }
        let mut out = String::new();
        for r in records {
            out.push_str(&serde_json::to_string(r).expect("records serialize"));
            out.push('\n');
        }
        fs::write(&path, out).map_err(|e| CorpusError::io(&path, e))?;
    }
    let mut manifest = manifest.clone();
    if let Some(store) = activations {
        let rel = manifest
            .activation_store
            .get_or_insert_with(|| PathBuf::from("activations.bin"))
            .clone();
        manifest.d = Some(store.dim());
        write_store(&dir.join(rel), store)?;
    }
    let path = dir.join("manifest.json");
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    fs::write(&path, json).map_err(|e| CorpusError::io(&path, e))?;
    Ok(path)
}
