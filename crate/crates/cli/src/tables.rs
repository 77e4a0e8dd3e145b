//! CSV schemas shared by the commands that write them and `report`.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
#[error("{path}: {reason}")]
pub struct SchemaError {
    pub path: PathBuf,
    pub reason: String,
}

pub trait Table: Serialize + DeserializeOwned {
    const HEADER: &'static [&'static str];
}

macro_rules! table {
    ($name:ident { $($field:ident : $ty:ty),* $(,)? }) => {
        #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
        pub struct $name {
            $(pub $field: $ty,)*
        }

        impl Table for $name {
            const HEADER: &'static [&'static str] = &[$(stringify!($field)),*];
        }
    };
}

table!(DetectRow {
    detector: String,
    subdomain: String,
    generator: String,
    auroc: f64,
    n_excluded: usize,
});

table!(SpectrumRow { index: usize, eigenvalue: f64 });

table!(FeatvalRow {
    subdomain: String,
    generator: String,
    domain: String,
    feature_gap: f64,
    detector: String,
    auroc: f64,
    n_excluded: usize,
});

table!(CorrelationRow { detector: String, rho: Option<f64>, n: usize });

table!(ShuffleRow {
    source_id: String,
    variant_id: String,
    tau_target: f64,
    target_inversions: u64,
    measured_inversions: u64,
    achieved_tau: f64,
});

table!(SweepRow {
    module_tag: String,
    domain: String,
    labels: String,
    n_train: usize,
    n_test: usize,
    train_auroc: f64,
    holdout_auroc: f64,
});

table!(TransferRow {
    detector: String,
    general_auroc: f64,
    personalized_auroc: f64,
    gap: f64,
    probe_auroc_mean: f64,
    verdict: String,
});

table!(ProbeAurocRow { detector: String, probe_id: String, auroc: f64 });

table!(ProbeRow {
    probe_id: String,
    general_source: String,
    personalized_source: String,
    min_positive: f64,
    max_negative: f64,
    domain_probe_auroc: f64,
    mgt_probe_auroc: f64,
});

table!(TrialRow { trial: usize, r: Option<f64>, members: String });

table!(AblationRow {
    count: usize,
    mean_r: Option<f64>,
    std_r: Option<f64>,
    defined_trials: usize,
});

/// Writes the header even when `rows` is empty.
pub fn write<T: Table>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .with_context(|| format!("writing {}", path.display()))?;
    w.write_record(T::HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a table written by [`write`]; a wrong header or malformed row is a
/// [`SchemaError`].
pub fn read<T: Table>(path: &Path) -> Result<Vec<T>> {
    let schema = |reason: String| SchemaError {
        path: path.to_owned(),
        reason,
    };
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let header = r.headers().map_err(|e| schema(e.to_string()))?;
    if header.iter().ne(T::HEADER.iter().copied()) {
        return Err(schema(format!("expected columns {:?}, found {:?}", T::HEADER, header.iter().collect::<Vec<_>>())).into());
    }
    let rows = r
        .deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(|e| schema(e.to_string()))?;
    Ok(rows)
}
