use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{CorpusError, TextRecord, SCHEMA_VERSION};
use crate::inversion::Provenance;

pub const STORE_MAGIC: &[u8; 5] = b"IVTR1";
const HEADER_LEN: usize = STORE_MAGIC.len() + 4;

/// Last-token hidden representation of one text under one module.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivationVector {
    pub text_id: String,
    pub module_tag: String,
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreIndexEntry {
    pub text_id: String,
    pub module_tag: String,
    /// Byte offset of the first `f32` of this vector.
    pub offset: u64,
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation_anchor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreIndex {
    pub schema_version: u32,
    pub d: usize,
    pub entries: Vec<StoreIndexEntry>,
}

/// In-memory activation vectors keyed by `(text_id, module_tag)`.
///
/// All vectors share one dimension. Values pass through `f32` on disk, so
/// [`ActivationStore::push`] rounds to `f32` precision up front to keep
/// in-memory and on-disk stores identical.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ActivationStore {
    d: usize,
    entries: Vec<StoreIndexEntry>,
    vectors: Vec<Vec<f64>>,
    lookup: HashMap<(String, String), usize>,
}

impl ActivationStore {
    pub fn new(d: usize) -> Self {
        Self {
            d,
            ..Self::default()
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn push(&mut self, v: ActivationVector) -> Result<(), CorpusError> {
        self.push_with_meta(v, None, None)
    }

    pub fn push_with_meta(
        &mut self,
        v: ActivationVector,
        provenance: Option<Provenance>,
        orientation_anchor: Option<f64>,
    ) -> Result<(), CorpusError> {
        if v.vector.len() != self.d {
            return Err(CorpusError::invariant(
                &v.text_id,
                "vector",
                format!("dimension {} under tag {}, store has {}", v.vector.len(), v.module_tag, self.d),
            ));
        }
        if let Some(x) = v.vector.iter().find(|x| !x.is_finite() || !(**x as f32).is_finite()) {
            return Err(CorpusError::invariant(&v.text_id, "vector", format!("non-finite component {x}")));
        }
        let key = (v.text_id.clone(), v.module_tag.clone());
        if self.lookup.contains_key(&key) {
            return Err(CorpusError::invariant(
                &v.text_id,
                "activation",
                format!("duplicate activation under tag {}", v.module_tag),
            ));
        }
        let offset = (HEADER_LEN + self.vectors.len() * self.d * 4) as u64;
        self.lookup.insert(key, self.vectors.len());
        self.entries.push(StoreIndexEntry {
            text_id: v.text_id,
            module_tag: v.module_tag,
            offset,
            d: self.d,
            provenance,
            orientation_anchor,
        });
        self.vectors.push(v.vector.iter().map(|&x| f64::from(x as f32)).collect());
        Ok(())
    }

    pub fn get(&self, text_id: &str, module_tag: &str) -> Option<&[f64]> {
        self.lookup
            .get(&(text_id.to_owned(), module_tag.to_owned()))
            .map(|&i| self.vectors[i].as_slice())
    }

    pub fn require(&self, text_id: &str, module_tag: &str) -> Result<&[f64], CorpusError> {
        self.get(text_id, module_tag).ok_or_else(|| CorpusError::MissingActivation {
            text_id: text_id.into(),
            module_tag: module_tag.into(),
        })
    }

    pub fn contains_text(&self, text_id: &str) -> bool {
        self.entries.iter().any(|e| e.text_id == text_id)
    }

    pub fn entry(&self, i: usize) -> &StoreIndexEntry {
        &self.entries[i]
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.vectors[i]
    }

    /// Distinct module tags in first-seen order.
    pub fn module_tags(&self) -> Vec<String> {
        let mut seen = Vec::new();
        for e in &self.entries {
            if !seen.contains(&e.module_tag) {
                seen.push(e.module_tag.clone());
            }
        }
        seen
    }

    /// All vectors of one tag, keyed by text id.
    pub fn table(&self, module_tag: &str) -> ActivationTable {
        ActivationTable {
            module_tag: module_tag.to_owned(),
            vectors: self
                .entries
                .iter()
                .zip(&self.vectors)
                .filter(|(e, _)| e.module_tag == module_tag)
                .map(|(e, v)| (e.text_id.clone(), v.clone()))
                .collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&StoreIndexEntry, &[f64])> {
        self.entries.iter().zip(self.vectors.iter().map(Vec::as_slice))
    }
}

/// Vectors of a single module tag, looked up by record.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ActivationTable {
    pub module_tag: String,
    pub vectors: BTreeMap<String, Vec<f64>>,
}

impl ActivationTable {
    pub fn new(module_tag: impl Into<String>) -> Self {
        Self {
            module_tag: module_tag.into(),
            vectors: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, text_id: impl Into<String>, v: Vec<f64>) {
        self.vectors.insert(text_id.into(), v);
    }

    pub fn get(&self, text_id: &str) -> Option<&[f64]> {
        self.vectors.get(text_id).map(Vec::as_slice)
    }

    /// Vector of a record, found via its `activation_ref` or else its id.
    pub fn for_record(&self, r: &TextRecord) -> Option<&[f64]> {
        self.get(r.activation_ref.as_deref().unwrap_or(&r.id))
    }

    pub fn require(&self, r: &TextRecord) -> Result<&[f64], CorpusError> {
        self.for_record(r).ok_or_else(|| CorpusError::MissingActivation {
            text_id: r.id.clone(),
            module_tag: self.module_tag.clone(),
        })
    }

    /// Vectors of `records`, in order.
    pub fn collect<'a>(&self, records: impl IntoIterator<Item = &'a TextRecord>) -> Result<Vec<Vec<f64>>, CorpusError> {
        records.into_iter().map(|r| self.require(r).map(<[f64]>::to_vec)).collect()
    }
}

pub fn sidecar_path(store: &Path) -> PathBuf {
    let mut name = store.as_os_str().to_owned();
    name.push(".idx.json");
    PathBuf::from(name)
}

pub fn write_store(path: &Path, store: &ActivationStore) -> Result<(), CorpusError> {
    let mut bytes = Vec::with_capacity(HEADER_LEN + store.len() * store.d * 4);
    bytes.extend_from_slice(STORE_MAGIC);
    bytes.extend_from_slice(&(store.d as u32).to_le_bytes());
    for v in &store.vectors {
        for &x in v {
            bytes.extend_from_slice(&(x as f32).to_le_bytes());
        }
    }
    fs::write(path, bytes).map_err(|e| CorpusError::io(path, e))?;
    let index = StoreIndex {
        schema_version: SCHEMA_VERSION,
        d: store.d,
        entries: store.entries.clone(),
    };
    let mut json = serde_json::to_string_pretty(&index).expect("index serializes");
    json.push('\n');
    let side = sidecar_path(path);
    fs::write(&side, json).map_err(|e| CorpusError::io(side, e))
}

pub fn read_store(path: &Path) -> Result<ActivationStore, CorpusError> {
    let bad = |reason: String| CorpusError::Store {
        path: path.to_owned(),
        reason,
    };
    let bytes = fs::read(path).map_err(|e| CorpusError::io(path, e))?;
    if bytes.len() < HEADER_LEN || &bytes[..STORE_MAGIC.len()] != STORE_MAGIC {
        return Err(bad("missing IVTR1 header".into()));
    }
    let d = u32::from_le_bytes(bytes[5..9].try_into().expect("4 bytes")) as usize;
    let side = sidecar_path(path);
    let text = fs::read_to_string(&side).map_err(|e| CorpusError::io(&side, e))?;
    let index: StoreIndex = serde_json::from_str(&text).map_err(|e| CorpusError::Parse {
        path: side.clone(),
        line: e.line(),
        message: e.to_string(),
    })?;
    if index.schema_version != SCHEMA_VERSION {
        return Err(CorpusError::SchemaVersionMismatch {
            found: index.schema_version,
            supported: SCHEMA_VERSION,
        });
    }
    if index.d != d {
        return Err(bad(format!("sidecar dimension {} disagrees with header {d}", index.d)));
    }

    let mut store = ActivationStore::new(d);
    for entry in index.entries {
        if entry.d != d {
            return Err(bad(format!("entry {} has dimension {}, header {d}", entry.text_id, entry.d)));
        }
        let start = usize::try_from(entry.offset).map_err(|_| bad("offset overflow".into()))?;
        let end = start
            .checked_add(d * 4)
            .filter(|&end| start >= HEADER_LEN && end <= bytes.len())
            .ok_or_else(|| bad(format!("entry {} points outside the payload", entry.text_id)))?;
        let vector: Vec<f64> = bytes[start..end]
            .chunks_exact(4)
            .map(|c| f64::from(f32::from_le_bytes(c.try_into().expect("4 bytes"))))
            .collect();
        store.push_with_meta(
            ActivationVector {
                text_id: entry.text_id,
                module_tag: entry.module_tag,
                vector,
            },
            entry.provenance,
            entry.orientation_anchor,
        )?;
    }
    Ok(store)
}
