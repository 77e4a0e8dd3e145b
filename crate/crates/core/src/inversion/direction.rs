use std::fmt;

use serde::{Deserialize, Serialize};

use crate::stats::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Inverted,
    MgtClassifier,
    DomainClassifier,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Inverted => "inverted",
            Self::MgtClassifier => "mgt-classifier",
            Self::DomainClassifier => "domain-classifier",
        })
    }
}

/// Unit vector in activation space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureDirection {
    vector: Vec<f64>,
    provenance: Provenance,
    /// For inverted directions: mean projection of the general-domain
    /// difference vectors, non-negative by construction.
    orientation_anchor: f64,
}

impl FeatureDirection {
    /// Normalizes `vector` to unit length.
    pub fn new(vector: Vec<f64>, provenance: Provenance, orientation_anchor: f64) -> Result<Self, StatsError> {
        if let Some(index) = vector.iter().position(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite { index });
        }
        let norm = vector.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(StatsError::ZeroWeights);
        }
        Ok(Self {
            vector: vector.into_iter().map(|v| v / norm).collect(),
            provenance,
            orientation_anchor,
        })
    }

    pub fn vector(&self) -> &[f64] {
        &self.vector
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn orientation_anchor(&self) -> f64 {
        self.orientation_anchor
    }

    pub fn dim(&self) -> usize {
        self.vector.len()
    }

    pub fn cosine(&self, other: &FeatureDirection) -> f64 {
        self.vector.iter().zip(&other.vector).map(|(a, b)| a * b).sum()
    }
}
