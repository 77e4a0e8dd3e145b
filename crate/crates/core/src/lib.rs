//! Measurement toolkit for machine-generated-text (MGT) detectors moving from
//! general to personalized domains.
//!
//! The crate is organised bottom-up:
//!
//! * [`stats`]: AUROC, correlation coefficients, a Jacobi symmetric
//!   eigensolver and a deterministic logistic-regression probe.
//! * [`corpus_io`]: record types, manifests, the activation store and the
//!   (subdomain, generator) partition.
//! * [`detectors`]: the seven training-free detector statistics.
//! * [`inversion`]: cross-domain difference vectors, the inversion matrix and
//!   the minimum-eigenvalue ("inverted") feature direction.
//! * [`shuffler`]: permutations with an exact inversion count, i.e. exact
//!   Kendall's tau against the original order.
//! * [`stylocheck`]: probe-dataset synthesis and the transferability estimator.
//! * [`synthlab`]: planted-geometry synthetic corpora used as ground truth.

pub mod corpus_io;
pub mod detectors;
pub mod inversion;
pub mod seeding;
pub mod shuffler;
pub mod stats;
pub mod stylocheck;
pub mod synthlab;

pub use corpus_io::{
    ActivationStore, ActivationVector, ClassLabel, Corpus, CorpusError, DatasetManifest,
    DomainLabel, Subset, SubsetKey, TextRecord, TokenScoreRecord,
};
pub use detectors::{DetectorConfig, DetectorError, DetectorKind, TextDetector};
pub use inversion::{FeatureDirection, Provenance};
pub use stats::{LinearClassifier, Matrix, StatsError};
