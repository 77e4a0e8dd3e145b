//! Multi-scale diversity entropy of a log-probability sequence.
//!
//! For every scale `s` in `1..=S` the sequence is coarse-grained by averaging
//! disjoint blocks of `s` values (a trailing partial block is dropped). Sliding
//! windows of length `m` are formed, consecutive windows are compared by cosine
//! similarity, the similarities are histogrammed into `B` equal bins on
//! `[-1, 1]` and the normalized Shannon entropy of that histogram is the
//! scale's diversity entropy. The multi-scale value is the mean over scales.

use serde::{Deserialize, Serialize};

use super::DetectorError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LastdeConfig {
    /// Window length.
    pub m: usize,
    pub bins: usize,
    pub scales: usize,
    pub epsilon_de: f64,
    /// Contrast sequences used by Lastde++.
    pub contrast_count: usize,
}

impl Default for LastdeConfig {
    fn default() -> Self {
        Self {
            m: 4,
            bins: 5,
            scales: 3,
            epsilon_de: 1e-6,
            contrast_count: 8,
        }
    }
}

impl LastdeConfig {
    pub fn validate(&self) -> Result<(), DetectorError> {
        let bad = |what: &str| Err(DetectorError::InvalidConfig(what.to_owned()));
        if self.m < 2 {
            return bad("lastde window m must be at least 2");
        }
        if self.bins < 2 {
            return bad("lastde bins must be at least 2");
        }
        if self.scales < 1 {
            return bad("lastde scales must be at least 1");
        }
        if !(self.epsilon_de > 0.0) {
            return bad("lastde epsilon_de must be positive");
        }
        if self.contrast_count < 1 {
            return bad("lastde contrast_count must be at least 1");
        }
        Ok(())
    }

    /// Shortest sequence that yields at least one window pair at every scale.
    pub fn min_len(&self) -> usize {
        self.scales * (self.m + 1)
    }
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    match (na == 0.0, nb == 0.0) {
        (true, true) => 1.0,
        (false, false) => (dot / (na * nb)).clamp(-1.0, 1.0),
        _ => 0.0,
    }
}

/// Normalized histogram entropy of consecutive-window cosine similarities.
pub fn diversity_entropy(seq: &[f64], m: usize, bins: usize) -> f64 {
    let mut counts = vec![0usize; bins];
    let windows: Vec<&[f64]> = seq.windows(m).collect();
    for pair in windows.windows(2) {
        let c = cosine(pair[0], pair[1]);
        let b = (((c + 1.0) / 2.0) * bins as f64).floor() as usize;
        counts[b.min(bins - 1)] += 1;
    }
    let total: usize = counts.iter().sum();
    let h: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total as f64;
            -p * p.ln()
        })
        .sum();
    h / (bins as f64).ln()
}

pub fn coarse_grain(seq: &[f64], s: usize) -> Vec<f64> {
    seq.chunks_exact(s).map(|c| c.iter().sum::<f64>() / s as f64).collect()
}

pub fn multiscale_diversity_entropy(seq: &[f64], cfg: &LastdeConfig) -> Result<f64, DetectorError> {
    cfg.validate()?;
    if seq.len() < cfg.min_len() {
        return Err(DetectorError::TooShort {
            needed: cfg.min_len(),
            got: seq.len(),
        });
    }
    let total: f64 = (1..=cfg.scales)
        .map(|s| diversity_entropy(&coarse_grain(seq, s), cfg.m, cfg.bins))
        .sum();
    Ok(total / cfg.scales as f64)
}

/// `mean(L) / max(MDE, epsilon_de)`.
pub fn lastde_raw(seq: &[f64], cfg: &LastdeConfig, strict: bool) -> Result<f64, DetectorError> {
    let mde = multiscale_diversity_entropy(seq, cfg)?;
    if strict && mde == 0.0 {
        return Err(DetectorError::DegenerateSequence);
    }
    let mean = seq.iter().sum::<f64>() / seq.len() as f64;
    Ok(mean / mde.max(cfg.epsilon_de))
}

/// Standardizes `actual` against contrast values with the sample standard
/// deviation, floored at `1e-8`.
pub fn normalize_against_contrasts(actual: f64, contrasts: &[f64]) -> f64 {
    let k = contrasts.len() as f64;
    // centred on the first contrast so identical contrasts give an exact mean
    let c0 = contrasts[0];
    let mean = c0 + contrasts.iter().map(|c| c - c0).sum::<f64>() / k;
    let var = contrasts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (actual - mean) / var.sqrt().max(1e-8)
}
