//! Token shuffles with an exact Kendall's tau against the original order.
//!
//! A permutation of `n` items with `I` inversions has
//! `tau = 1 - 4I / (n(n-1))`, so hitting a target tau reduces to hitting
//! `I* = round((1 - tau) n(n-1) / 4)` inversions. Starting from the identity,
//! each swap of an adjacent ascending pair adds exactly one inversion, so
//! `I*` seeded swaps land on the target exactly. The walk does not sample
//! uniformly from all permutations with `I*` inversions.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus_io::{TextRecord, VariantMeta};
use crate::seeding;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShuffleError {
    #[error("invalid shuffle spec: {0}")]
    InvalidSpec(String),
    #[error("text has {got} tokens, spec expects {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid tau grid: {0}")]
    InvalidRange(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShuffleSpec {
    pub n: usize,
    pub tau_target: f64,
    pub seed: u64,
}

impl ShuffleSpec {
    pub fn new(n: usize, tau_target: f64, seed: u64) -> Self {
        Self { n, tau_target, seed }
    }

    pub fn max_inversions(&self) -> u64 {
        let n = self.n as u64;
        n * n.saturating_sub(1) / 2
    }

    pub fn validate(&self) -> Result<(), ShuffleError> {
        if self.n < 2 {
            return Err(ShuffleError::InvalidSpec(format!("n = {} < 2", self.n)));
        }
        if !(-1.0..=1.0).contains(&self.tau_target) {
            return Err(ShuffleError::InvalidSpec(format!("tau {} outside [-1, 1]", self.tau_target)));
        }
        Ok(())
    }

    /// `round((1 - tau) n(n-1) / 4)`, clamped to the attainable range. Near a
    /// half-integer the neighbour whose tau is closer in floating point wins.
    pub fn target_inversions(&self) -> u64 {
        let n = self.n as f64;
        let exact = (1.0 - self.tau_target) * n * (n - 1.0) / 4.0;
        let max = self.max_inversions();
        let lo = (exact.floor().max(0.0) as u64).min(max);
        let hi = (lo + 1).min(max);
        let err = |i: u64| (tau_from_inversions(self.n, i) - self.tau_target).abs();
        if err(hi) < err(lo) {
            hi
        } else {
            lo
        }
    }
}

/// `1 - 4I / (n(n-1))`.
pub fn tau_from_inversions(n: usize, inversions: u64) -> f64 {
    let n = n as f64;
    1.0 - 4.0 * inversions as f64 / (n * (n - 1.0))
}

/// Ascending adjacent positions `i` (with `p[i] < p[i+1]`), kept as a
/// swap-remove set so picking and updating are O(1).
struct AscendingSet {
    items: Vec<usize>,
    slot: Vec<Option<usize>>,
}

impl AscendingSet {
    fn new(n: usize) -> Self {
        Self {
            items: (0..n - 1).collect(),
            slot: (0..n - 1).map(Some).collect(),
        }
    }

    fn remove(&mut self, i: usize) {
        if let Some(s) = self.slot[i].take() {
            self.items.swap_remove(s);
            if let Some(&moved) = self.items.get(s) {
                self.slot[moved] = Some(s);
            }
        }
    }

    fn insert(&mut self, i: usize) {
        if self.slot[i].is_none() {
            self.slot[i] = Some(self.items.len());
            self.items.push(i);
        }
    }

    fn refresh(&mut self, p: &[usize], i: usize) {
        if p[i] < p[i + 1] {
            self.insert(i);
        } else {
            self.remove(i);
        }
    }
}

/// Permutation of `0..n` with exactly `spec.target_inversions()` inversions.
pub fn gen_permutation(spec: &ShuffleSpec) -> Result<Vec<usize>, ShuffleError> {
    spec.validate()?;
    let n = spec.n;
    let mut p: Vec<usize> = (0..n).collect();
    let mut asc = AscendingSet::new(n);
    let mut rng = seeding::rng(spec.seed, &[n as u64, spec.tau_target.to_bits()]);
    for _ in 0..spec.target_inversions() {
        let i = asc.items[rng.random_range(0..asc.items.len())];
        debug_assert!(p[i] < p[i + 1], "swap must add exactly one inversion");
        p.swap(i, i + 1);
        asc.remove(i);
        if i > 0 {
            asc.refresh(&p, i - 1);
        }
        if i + 2 < n {
            asc.refresh(&p, i + 1);
        }
    }
    Ok(p)
}

/// Tokens reordered by [`gen_permutation`]: `out[i] = tokens[perm[i]]`.
pub fn shuffle_text(t: &TextRecord, spec: &ShuffleSpec) -> Result<(Vec<String>, Vec<usize>), ShuffleError> {
    if t.tokens.len() != spec.n {
        return Err(ShuffleError::LengthMismatch {
            expected: spec.n,
            got: t.tokens.len(),
        });
    }
    let perm = gen_permutation(spec)?;
    let tokens = perm.iter().map(|&i| t.tokens[i].clone()).collect();
    Ok((tokens, perm))
}

/// Unscored shuffled copy of `source`, flagged for re-scoring.
pub fn variant_record(
    source: &TextRecord,
    spec: &ShuffleSpec,
    variant_index: usize,
    probe_id: Option<&str>,
) -> Result<TextRecord, ShuffleError> {
    let (tokens, _) = shuffle_text(source, spec)?;
    let id = match probe_id {
        Some(p) => format!("{p}:{}~v{variant_index:04}", source.id),
        None => format!("{}~v{variant_index:04}", source.id),
    };
    Ok(TextRecord {
        id,
        tokens,
        class_label: source.class_label,
        domain_label: source.domain_label,
        subdomain: source.subdomain.clone(),
        generator: source.generator.clone(),
        scores: None,
        activation_ref: None,
        needs_scoring: true,
        variant: Some(VariantMeta {
            source_id: source.id.clone(),
            probe_id: probe_id.map(str::to_owned),
            variant_index,
            tau_target: spec.tau_target,
            achieved_tau: tau_from_inversions(spec.n, spec.target_inversions()),
            seed: spec.seed,
        }),
    })
}

/// `count` evenly spaced values from `lo` to `hi`, both included.
pub fn tau_grid(count: usize, lo: f64, hi: f64) -> Result<Vec<f64>, ShuffleError> {
    if count < 2 {
        return Err(ShuffleError::InvalidRange(format!("count {count} < 2")));
    }
    if !(-1.0 <= lo && lo < hi && hi <= 1.0) {
        return Err(ShuffleError::InvalidRange(format!("[{lo}, {hi}] not within [-1, 1] with lo < hi")));
    }
    let step = (hi - lo) / (count - 1) as f64;
    Ok((0..count)
        .map(|i| if i == count - 1 { hi } else { lo + step * i as f64 })
        .collect())
}
