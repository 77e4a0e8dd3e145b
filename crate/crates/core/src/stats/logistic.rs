use serde::{Deserialize, Serialize};

use super::StatsError;
use crate::inversion::{FeatureDirection, Provenance};

/// Full-batch gradient descent settings for [`train_logistic`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogisticConfig {
    pub step: f64,
    pub l2: f64,
    pub max_iter: usize,
    pub tol: f64,
    /// Loss is recorded every this many iterations.
    pub checkpoint_every: usize,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self {
            step: 0.1,
            l2: 1e-4,
            max_iter: 5_000,
            tol: 1e-8,
            checkpoint_every: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub iterations: usize,
    pub final_loss: f64,
    pub gradient_norm: f64,
    pub converged: bool,
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    /// `(iteration, loss)` pairs.
    pub checkpoints: Vec<(usize, f64)>,
}

/// Logistic-regression probe. `weights` live in standardized feature space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearClassifier {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub training_meta: TrainingMeta,
}

impl LinearClassifier {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Logit for a raw (unstandardized) feature vector.
    pub fn decision(&self, x: &[f64]) -> f64 {
        let meta = &self.training_meta;
        self.weights
            .iter()
            .zip(x)
            .zip(meta.means.iter().zip(&meta.scales))
            .map(|((w, xi), (m, s))| w * (xi - m) / s)
            .sum::<f64>()
            + self.bias
    }

    /// Weights expressed in raw feature space (`w_j / scale_j`).
    pub fn raw_weights(&self) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.training_meta.scales)
            .map(|(w, s)| w / s)
            .collect()
    }
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Trains an L2-regularised logistic regression (`y = true` is the positive
/// class) on standardized features, starting from zero weights.
pub fn train_logistic(
    x: &[Vec<f64>],
    y: &[bool],
    cfg: &LogisticConfig,
) -> Result<LinearClassifier, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let positives = y.iter().filter(|&&l| l).count();
    let negatives = y.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(StatsError::OneClassOnly {
            positives,
            negatives,
        });
    }
    let d = x[0].len();
    for (i, row) in x.iter().enumerate() {
        if row.len() != d {
            return Err(StatsError::LengthMismatch {
                left: d,
                right: row.len(),
            });
        }
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite { index: i * d + j });
        }
    }

    let n = x.len();
    let nf = n as f64;
    let mut means = vec![0.0; d];
    for row in x {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    means.iter_mut().for_each(|m| *m /= nf);
    let mut scales = vec![0.0; d];
    for row in x {
        for ((s, v), m) in scales.iter_mut().zip(row).zip(&means) {
            *s += (v - m) * (v - m);
        }
    }
    for s in scales.iter_mut() {
        let sd = (*s / nf).sqrt();
        *s = if sd > 0.0 { sd } else { 1.0 };
    }
    let z: Vec<f64> = x
        .iter()
        .flat_map(|row| row.iter().zip(&means).zip(&scales).map(|((v, m), s)| (v - m) / s))
        .collect();
    let targets: Vec<f64> = y.iter().map(|&l| if l { 1.0 } else { 0.0 }).collect();

    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut grad_w = vec![0.0; d];
    let mut checkpoints = Vec::new();
    let mut iterations = 0;

    let evaluate = |w: &[f64], b: f64, grad_w: &mut [f64]| -> (f64, f64, f64) {
        grad_w.iter_mut().for_each(|g| *g = 0.0);
        let mut grad_b = 0.0;
        let mut loss = 0.0;
        for (row, &t) in z.chunks_exact(d.max(1)).take(n).zip(&targets) {
            let logit = row.iter().zip(w).map(|(a, c)| a * c).sum::<f64>() + b;
            loss += softplus(logit) - t * logit;
            let r = sigmoid(logit) - t;
            grad_b += r;
            for (g, a) in grad_w.iter_mut().zip(row) {
                *g += r * a;
            }
        }
        let penalty: f64 = w.iter().map(|c| c * c).sum();
        let loss = loss / nf + 0.5 * cfg.l2 * penalty;
        let mut norm2 = (grad_b / nf).powi(2);
        for (g, c) in grad_w.iter_mut().zip(w) {
            *g = *g / nf + cfg.l2 * c;
            norm2 += *g * *g;
        }
        (loss, grad_b / nf, norm2.sqrt())
    };

    let (mut loss, mut grad_b, mut gnorm) = evaluate(&w, b, &mut grad_w);
    checkpoints.push((0, loss));
    while gnorm > cfg.tol && iterations < cfg.max_iter {
        for (c, g) in w.iter_mut().zip(&grad_w) {
            *c -= cfg.step * g;
        }
        b -= cfg.step * grad_b;
        iterations += 1;
        (loss, grad_b, gnorm) = evaluate(&w, b, &mut grad_w);
        if cfg.checkpoint_every > 0 && iterations % cfg.checkpoint_every == 0 {
            checkpoints.push((iterations, loss));
        }
    }
    if checkpoints.last().map(|c| c.0) != Some(iterations) {
        checkpoints.push((iterations, loss));
    }

    Ok(LinearClassifier {
        weights: w,
        bias: b,
        training_meta: TrainingMeta {
            iterations,
            final_loss: loss,
            gradient_norm: gnorm,
            converged: gnorm <= cfg.tol,
            means,
            scales,
            checkpoints,
        },
    })
}

/// Unit-norm direction of a classifier's raw-space weights.
pub fn classifier_direction(
    c: &LinearClassifier,
    provenance: Provenance,
) -> Result<FeatureDirection, StatsError> {
    let raw = c.raw_weights();
    if raw.iter().all(|&w| w == 0.0) {
        return Err(StatsError::ZeroWeights);
    }
    FeatureDirection::new(raw, provenance, 0.0)
}
