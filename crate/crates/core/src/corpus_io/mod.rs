//! Record types, manifests and file formats shared by every pipeline stage.
//!
//! * Records: one JSON [`TextRecord`] per line, UTF-8.
//! * Manifest: JSON [`DatasetManifest`] listing record files relative to the
//!   manifest's directory.
//! * Activations: `IVTR1` magic, `u32` little-endian dimension, then packed
//!   little-endian `f32` vectors; a JSON sidecar (`<store>.idx.json`) maps
//!   `(text_id, module_tag)` to byte offsets.

mod manifest;
mod partition;
mod records;
mod store;

pub use manifest::{load_corpus, write_corpus, Corpus, DatasetManifest, ManifestEntry};
pub use partition::{partition_subsets, Subset, SubsetKey};
pub use records::{
    ClassLabel, DomainLabel, TextRecord, TokenScoreRecord, VariantMeta, COND_MEAN_TOL, HUMAN,
};
pub use store::{
    read_store, sidecar_path, write_store, ActivationStore, ActivationTable, ActivationVector, StoreIndex,
    StoreIndexEntry, STORE_MAGIC,
};

use std::path::PathBuf;

use thiserror::Error;

/// Manifest and sidecar schema version understood by this build.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed record: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("unsupported schema version {found} (supported: {supported})")]
    SchemaVersionMismatch { found: u32, supported: u32 },
    #[error("record {record_id}: invalid {field}: {reason}")]
    InvariantViolation {
        record_id: String,
        field: String,
        reason: String,
    },
    #[error("{file}: expected {expected} records, found {found}")]
    CountMismatch {
        file: PathBuf,
        expected: usize,
        found: usize,
    },
    #[error("manifest lists ({subdomain}, {generator}) more than once")]
    DuplicateEntry { subdomain: String, generator: String },
    #[error("subset {key} has no {missing} texts")]
    EmptySubset { key: String, missing: &'static str },
    #[error("subdomain {subdomain} mixes general and personalized records")]
    MixedDomain { subdomain: String },
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("activation store {path}: {reason}")]
    Store { path: PathBuf, reason: String },
    #[error("no activation for text {text_id} under tag {module_tag}")]
    MissingActivation { text_id: String, module_tag: String },
}

impl CorpusError {
    pub(crate) fn invariant(
        record_id: impl Into<String>,
        field: impl Into<String>,
        reason: impl Into<String>,
    ) -> Self {
        Self::InvariantViolation {
            record_id: record_id.into(),
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors describing bad data (as opposed to bad invocation or IO).
    pub fn is_data_violation(&self) -> bool {
        matches!(
            self,
            Self::Parse { .. }
                | Self::InvariantViolation { .. }
                | Self::CountMismatch { .. }
                | Self::DuplicateEntry { .. }
                | Self::MixedDomain { .. }
                | Self::Store { .. }
                | Self::MissingActivation { .. }
        )
    }
}
