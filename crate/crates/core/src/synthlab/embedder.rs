use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{dot, PlantedDirections, SynthConfig};
use crate::corpus_io::{ActivationTable, TextRecord};
use crate::seeding;
use crate::stats::inversion_count;
use crate::stylocheck::{Embedder, StyloError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeEmbedderConfig {
    /// Shift along the shuffle direction of a fully reversed variant. Large
    /// against the gap between source texts along `w*`, so the top and bottom
    /// of a probe draw on both sources.
    pub shuffle_gain: f64,
    /// Expected norm of the per-variant noise.
    pub variant_noise: f64,
}

impl Default for ProbeEmbedderConfig {
    fn default() -> Self {
        Self {
            shuffle_gain: 200.0,
            variant_noise: 1.0,
        }
    }
}

/// Embeds shuffled copies of synthetic texts.
///
/// A variant of source `s` with `I` inversions out of `I_max` lands at
/// `x_s + gain * (I / I_max) * u_shuf + noise`, where `u_shuf` is `u_inv` made
/// orthogonal to the mean HWT domain contrast. Shuffling therefore moves texts
/// along the inverted feature without moving them between domains.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthEmbedder {
    sources: ActivationTable,
    u_shuf: Vec<f64>,
    cfg: ProbeEmbedderConfig,
    seed: u64,
}

impl SynthEmbedder {
    pub fn new(
        planted: &PlantedDirections,
        synth: &SynthConfig,
        sources: ActivationTable,
        cfg: ProbeEmbedderConfig,
        seed: u64,
    ) -> Self {
        let a = synth.alpha_general - synth.alpha_personalized;
        let contrast: Vec<f64> = planted
            .u_dom
            .iter()
            .zip(&planted.u_inv)
            .map(|(d, i)| synth.delta_dom * d + a * i)
            .collect();
        let mut u = planted.u_inv.clone();
        remove_component(&mut u, &contrast);
        Self {
            sources,
            u_shuf: u,
            cfg,
            seed,
        }
    }

    /// Additionally makes the shuffle direction orthogonal to each of `dirs`,
    /// e.g. the weights of a trained domain probe, so shuffling is invisible to it.
    pub fn protecting(mut self, dirs: &[Vec<f64>]) -> Self {
        for d in dirs {
            remove_component(&mut self.u_shuf, d);
        }
        self
    }

    pub fn shuffle_direction(&self) -> &[f64] {
        &self.u_shuf
    }
}

impl Embedder for SynthEmbedder {
    fn embed(&self, t: &TextRecord) -> Result<Vec<f64>, StyloError> {
        let fail = |reason: String| StyloError::EmbedderFailure {
            text_id: t.id.clone(),
            reason,
        };
        let mut source: Option<&str> = None;
        let mut positions = Vec::with_capacity(t.tokens.len());
        for tok in &t.tokens {
            let (src, pos) = tok
                .rsplit_once('#')
                .ok_or_else(|| fail(format!("token {tok:?} is not a synthetic token")))?;
            let pos: usize = pos.parse().map_err(|_| fail(format!("token {tok:?} has no position")))?;
            match source {
                None => source = Some(src),
                Some(s) if s != src => return Err(fail("tokens from more than one source".into())),
                _ => {}
            }
            positions.push(pos);
        }
        let src = source.ok_or_else(|| fail("no tokens".into()))?;
        let x = self
            .sources
            .get(src)
            .ok_or_else(|| fail(format!("no activation for source {src}")))?;
        let n = positions.len() as u64;
        let max = n * n.saturating_sub(1) / 2;
        let r = if max == 0 {
            0.0
        } else {
            inversion_count(&positions) as f64 / max as f64
        };
        let mut rng = seeding::rng(self.seed, &[seeding::fnv1a(t.tokens.join(" ").as_bytes())]);
        let s = self.cfg.variant_noise / (x.len() as f64).sqrt();
        Ok(x.iter()
            .zip(&self.u_shuf)
            .map(|(xi, ui)| {
                let z: f64 = rng.sample(StandardNormal);
                xi + self.cfg.shuffle_gain * r * ui + s * z
            })
            .collect())
    }
}

/// Projects `d` out of `u` and renormalizes.
fn remove_component(u: &mut [f64], d: &[f64]) {
    let dd = dot(d, d);
    if dd > 0.0 {
        let p = dot(u, d) / dd;
        u.iter_mut().zip(d).for_each(|(x, c)| *x -= p * c);
    }
    let norm = dot(u, u).sqrt();
    u.iter_mut().for_each(|x| *x /= norm);
}
