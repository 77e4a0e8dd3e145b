//! The inverted feature direction.
//!
//! For MGT/HWT activations `g+, g-` (general) and `s+, s-` (personalized)
//! every quadruple contributes the projection product
//! `(w.v_G)(w.v_S) = w^T A_i w` with `v_G = g+ - g-`, `v_S = s+ - s-` and
//! `A_i = (v_G v_S^T + v_S v_G^T) / 2`. Minimising `w^T (sum_i A_i) w` over unit
//! `w` picks the eigenvector of the smallest eigenvalue: the axis along which
//! the general-domain MGT/HWT ordering is most strongly reversed in the
//! personalized domain.

mod direction;
mod study;

pub use direction::{FeatureDirection, Provenance};
pub use study::{
    correlation_study, direction_consistency_study, train_probe_classifiers, ClassSets,
    ConsistencyReport, CorrelationRow, CorrelationStudy, DomainPair, ProbeClassifiers,
    StudyTableRow,
};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus_io::CorpusError;
use crate::detectors::DetectorError;
use crate::stats::{eigh, Matrix, StatsError};

/// Relative eigenvalue gap under which the minimum eigenvalue is treated as repeated.
pub const DEGENERATE_GAP: f64 = 1e-9;
/// `-lambda_min / max|lambda|` under which the inversion is reported as weak.
pub const WEAK_INVERSION_RATIO: f64 = 0.1;

#[derive(Debug, Error)]
pub enum InversionError {
    #[error("no {0} activations")]
    EmptyClass(&'static str),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("need at least {needed} subsets, got {got}")]
    TooFewSubsets { needed: usize, got: usize },
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Detector(#[from] DetectorError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairingMode {
    /// Sum over every quadruple, computed in closed form from class means.
    #[default]
    CartesianMean,
    /// Disjoint index-matched quadruples after seeded shuffles.
    RandomMatched,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadrupleSet {
    pub pairing_mode: PairingMode,
    pub v_g: Vec<Vec<f64>>,
    pub v_s: Vec<Vec<f64>>,
    pub seed: u64,
    /// Number of quadruples represented (`|G+||G-||S+||S-|` in cartesian mode).
    pub quadruple_count: u64,
}

impl QuadrupleSet {
    pub fn dim(&self) -> usize {
        self.v_g.first().map_or(0, Vec::len)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InversionMatrix {
    pub a: Matrix,
    pub quadruple_count: u64,
    /// Mean of the general-domain difference vectors; fixes the sign of `w*`.
    pub v_g_mean: Vec<f64>,
    pub v_s_mean: Vec<f64>,
}

/// Result of [`extract_inverted_direction`].
#[derive(Debug, Clone, PartialEq)]
pub struct InvertedDirection {
    pub direction: FeatureDirection,
    pub lambda_min: f64,
    /// `lambda_min / quadruple_count`, comparable across corpus sizes.
    pub lambda_min_per_quadruple: f64,
    /// `w*^T A w*`.
    pub rayleigh: f64,
    /// Ascending.
    pub spectrum: Vec<f64>,
    pub degenerate_spectrum: bool,
    pub weak_inversion: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn mean_vector(vs: &[Vec<f64>]) -> Vec<f64> {
    let mut m = vec![0.0; vs[0].len()];
    for v in vs {
        for (a, b) in m.iter_mut().zip(v) {
            *a += b;
        }
    }
    let n = vs.len() as f64;
    m.iter_mut().for_each(|a| *a /= n);
    m
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn check_dims(groups: &[(&'static str, &[Vec<f64>])]) -> Result<usize, InversionError> {
    for (name, g) in groups {
        if g.is_empty() {
            return Err(InversionError::EmptyClass(name));
        }
    }
    let d = groups[0].1[0].len();
    for (_, g) in groups {
        if let Some(v) = g.iter().find(|v| v.len() != d) {
            return Err(InversionError::DimensionMismatch {
                expected: d,
                got: v.len(),
            });
        }
    }
    Ok(d)
}

/// Builds the cross-domain difference vectors.
pub fn build_quadruples(
    g_mgt: &[Vec<f64>],
    g_hwt: &[Vec<f64>],
    s_mgt: &[Vec<f64>],
    s_hwt: &[Vec<f64>],
    mode: PairingMode,
    seed: u64,
) -> Result<QuadrupleSet, InversionError> {
    check_dims(&[
        ("general MGT", g_mgt),
        ("general HWT", g_hwt),
        ("personalized MGT", s_mgt),
        ("personalized HWT", s_hwt),
    ])?;
    match mode {
        PairingMode::CartesianMean => {
            let count = [g_mgt.len(), g_hwt.len(), s_mgt.len(), s_hwt.len()]
                .iter()
                .fold(1u64, |acc, &n| acc.saturating_mul(n as u64));
            Ok(QuadrupleSet {
                pairing_mode: mode,
                v_g: vec![diff(&mean_vector(g_mgt), &mean_vector(g_hwt))],
                v_s: vec![diff(&mean_vector(s_mgt), &mean_vector(s_hwt))],
                seed,
                quadruple_count: count,
            })
        }
        PairingMode::RandomMatched => {
            let k = g_mgt.len().min(g_hwt.len()).min(s_mgt.len()).min(s_hwt.len());
            let mut rng = crate::seeding::rng(seed, &[0x9a1e]);
            let mut order = |n: usize| {
                let mut idx: Vec<usize> = (0..n).collect();
                idx.shuffle(&mut rng);
                idx
            };
            let (a, b, c, e) = (order(g_mgt.len()), order(g_hwt.len()), order(s_mgt.len()), order(s_hwt.len()));
            let v_g = (0..k).map(|i| diff(&g_mgt[a[i]], &g_hwt[b[i]])).collect();
            let v_s = (0..k).map(|i| diff(&s_mgt[c[i]], &s_hwt[e[i]])).collect();
            Ok(QuadrupleSet {
                pairing_mode: mode,
                v_g,
                v_s,
                seed,
                quadruple_count: k as u64,
            })
        }
    }
}

/// `A = w sum_i (v_G,i v_S,i^T + v_S,i v_G,i^T) / 2`, with `w` the number of
/// quadruples each stored pair stands for. Symmetric by construction.
pub fn build_inversion_matrix(q: &QuadrupleSet) -> Result<InversionMatrix, InversionError> {
    if q.v_g.is_empty() || q.v_g.len() != q.v_s.len() {
        return Err(InversionError::EmptyClass("quadruple"));
    }
    let d = q.dim();
    for v in q.v_g.iter().chain(&q.v_s) {
        if v.len() != d {
            return Err(InversionError::DimensionMismatch {
                expected: d,
                got: v.len(),
            });
        }
    }
    let weight = match q.pairing_mode {
        PairingMode::CartesianMean => q.quadruple_count as f64,
        PairingMode::RandomMatched => 1.0,
    };
    let mut a = Matrix::zeros(d, d);
    for (vg, vs) in q.v_g.iter().zip(&q.v_s) {
        for i in 0..d {
            for j in i..d {
                a[(i, j)] += 0.5 * (vg[i] * vs[j] + vs[i] * vg[j]);
            }
        }
    }
    for i in 0..d {
        for j in i..d {
            let v = weight * a[(i, j)];
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    Ok(InversionMatrix {
        a,
        quadruple_count: q.quadruple_count,
        v_g_mean: mean_vector(&q.v_g),
        v_s_mean: mean_vector(&q.v_s),
    })
}

/// Minimum-eigenvalue eigenvector of `A`, oriented so that the mean
/// general-domain difference projects non-negatively onto it.
pub fn extract_inverted_direction(m: &InversionMatrix) -> Result<InvertedDirection, InversionError> {
    let eig = eigh(&m.a)?;
    let d = eig.dim();
    if d == 0 {
        return Err(InversionError::EmptyClass("dimension"));
    }
    let mut w = eig.eigenvector(0);
    let mut anchor = dot(&w, &m.v_g_mean);
    if anchor < 0.0 {
        w.iter_mut().for_each(|x| *x = -*x);
        anchor = -anchor;
    }
    let lambda_min = eig.eigenvalues[0];
    let scale = eig.eigenvalues.iter().fold(0.0f64, |acc, l| acc.max(l.abs()));
    let degenerate = d > 1 && eig.eigenvalues[1] - lambda_min <= DEGENERATE_GAP * scale.max(1.0);
    let weak = -lambda_min <= WEAK_INVERSION_RATIO * scale;
    let rayleigh = m.a.quadratic_form(&w);
    let direction = FeatureDirection::new(w, Provenance::Inverted, anchor)?;
    Ok(InvertedDirection {
        direction,
        lambda_min,
        lambda_min_per_quadruple: lambda_min / m.quadruple_count.max(1) as f64,
        rayleigh,
        spectrum: eig.eigenvalues,
        degenerate_spectrum: degenerate,
        weak_inversion: weak,
    })
}

/// Convenience pipeline: quadruples, matrix and direction in one call.
pub fn invert(
    general: &ClassSets,
    personalized: &ClassSets,
    mode: PairingMode,
    seed: u64,
) -> Result<(InversionMatrix, InvertedDirection), InversionError> {
    let q = build_quadruples(&general.mgt, &general.hwt, &personalized.mgt, &personalized.hwt, mode, seed)?;
    let m = build_inversion_matrix(&q)?;
    let dir = extract_inverted_direction(&m)?;
    Ok((m, dir))
}

/// Scalar projection `x . w`.
pub fn feature_value(x: &[f64], w: &FeatureDirection) -> Result<f64, InversionError> {
    if x.len() != w.dim() {
        return Err(InversionError::DimensionMismatch {
            expected: w.dim(),
            got: x.len(),
        });
    }
    Ok(dot(x, w.vector()))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiffNormalization {
    /// Mean MGT projection minus mean HWT projection.
    #[default]
    MeanGap,
    /// Sum over every (MGT, HWT) pair: the mean gap times `N+ N-`.
    RawCartesian,
}

/// MGT-minus-HWT projection gap of one subset along `w`.
pub fn feature_value_difference(
    mgt: &[Vec<f64>],
    hwt: &[Vec<f64>],
    w: &FeatureDirection,
    normalization: DiffNormalization,
) -> Result<f64, InversionError> {
    if mgt.is_empty() {
        return Err(InversionError::EmptyClass("MGT"));
    }
    if hwt.is_empty() {
        return Err(InversionError::EmptyClass("HWT"));
    }
    let mean = |vs: &[Vec<f64>]| -> Result<f64, InversionError> {
        let mut s = 0.0;
        for v in vs {
            s += feature_value(v, w)?;
        }
        Ok(s / vs.len() as f64)
    };
    let gap = mean(mgt)? - mean(hwt)?;
    Ok(match normalization {
        DiffNormalization::MeanGap => gap,
        DiffNormalization::RawCartesian => gap * (mgt.len() * hwt.len()) as f64,
    })
}

#[cfg(test)]
mod tests;
