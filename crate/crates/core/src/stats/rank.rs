use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Positive,
    Negative,
}

/// A detector score with its ground-truth label. MGT is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredSample {
    pub score: f64,
    pub label: Label,
}

impl ScoredSample {
    pub fn new(score: f64, label: Label) -> Self {
        Self { score, label }
    }
}

fn check_finite(values: &[f64]) -> Result<(), StatsError> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(StatsError::NonFinite { index }),
        None => Ok(()),
    }
}

/// 1-based ranks; tied values share the average of the ranks they span.
///
/// Inputs must be finite; the comparison treats `-0.0 == 0.0`.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(Ordering::Equal));

    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // ranks start+1 ..= end averaged
        let avg = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = avg;
        }
        start = end;
    }
    ranks
}

/// Mann-Whitney U of the positive class: `#{(p, n): s_p > s_n} + 0.5 #{ties}`.
///
/// Computed from the rank sum, so the result is an exact half-integer for any
/// sample small enough that the rank sum fits a 53-bit mantissa.
pub fn mann_whitney_u(positives: &[f64], negatives: &[f64]) -> Result<f64, StatsError> {
    if positives.is_empty() || negatives.is_empty() {
        return Err(StatsError::OneClassOnly {
            positives: positives.len(),
            negatives: negatives.len(),
        });
    }
    check_finite(positives)?;
    check_finite(negatives).map_err(|e| match e {
        StatsError::NonFinite { index } => StatsError::NonFinite {
            index: index + positives.len(),
        },
        other => other,
    })?;

    let mut joined = Vec::with_capacity(positives.len() + negatives.len());
    joined.extend_from_slice(positives);
    joined.extend_from_slice(negatives);
    let ranks = average_ranks(&joined);
    let rank_sum: f64 = ranks[..positives.len()].iter().sum();
    let p = positives.len() as f64;
    Ok(rank_sum - p * (p + 1.0) / 2.0)
}

/// AUROC from split score lists.
pub fn auroc_split(positives: &[f64], negatives: &[f64]) -> Result<f64, StatsError> {
    let u = mann_whitney_u(positives, negatives)?;
    Ok(u / (positives.len() as f64 * negatives.len() as f64))
}

/// Probability that a random positive outscores a random negative, ties
/// counted as one half.
pub fn auroc(samples: &[ScoredSample]) -> Result<f64, StatsError> {
    let (pos, neg): (Vec<&ScoredSample>, Vec<&ScoredSample>) = samples.iter().partition(|s| s.label == Label::Positive);
    let pos: Vec<f64> = pos.into_iter().map(|s| s.score).collect();
    let neg: Vec<f64> = neg.into_iter().map(|s| s.score).collect();
    auroc_split(&pos, &neg)
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<(), StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(StatsError::TooShort { n: x.len() });
    }
    check_finite(x)?;
    check_finite(y)
}

/// Pearson product-moment correlation, two-pass centred sums.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    check_pair(x, y)?;
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Spearman's rho. Without ties this is `1 - 6 sum d^2 / (n(n^2 - 1))` on
/// integer ranks; with ties it is Pearson on average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    check_pair(x, y)?;
    let (rx, ry) = (average_ranks(x), average_ranks(y));
    if has_duplicates(&rx) || has_duplicates(&ry) {
        return pearson(&rx, &ry);
    }
    let d2: u64 = rx
        .iter()
        .zip(&ry)
        .map(|(a, b)| {
            let d = (*a as i64 - *b as i64).unsigned_abs();
            d * d
        })
        .sum();
    let n = x.len() as f64;
    Ok(1.0 - 6.0 * d2 as f64 / (n * (n * n - 1.0)))
}

fn has_duplicates(ranks: &[f64]) -> bool {
    let mut r = ranks.to_vec();
    r.sort_by(f64::total_cmp);
    r.windows(2).any(|w| w[0] == w[1])
}

/// Number of pairs `i < j` with `perm[i] > perm[j]`, by merge sort.
pub fn inversion_count<T: Ord + Copy>(perm: &[T]) -> u64 {
    fn sort_count<T: Ord + Copy>(v: &mut [T], buf: &mut Vec<T>) -> u64 {
        let n = v.len();
        if n < 2 {
            return 0;
        }
        let mid = n / 2;
        let mut count = sort_count(&mut v[..mid], buf) + sort_count(&mut v[mid..], buf);
        buf.clear();
        let (mut i, mut j) = (0, mid);
        while i < mid && j < n {
            if v[j] < v[i] {
                count += (mid - i) as u64;
                buf.push(v[j]);
                j += 1;
            } else {
                buf.push(v[i]);
                i += 1;
            }
        }
        buf.extend_from_slice(&v[i..mid]);
        buf.extend_from_slice(&v[j..n]);
        v.copy_from_slice(buf);
        count
    }
    let mut work = perm.to_vec();
    let mut buf = Vec::with_capacity(perm.len());
    sort_count(&mut work, &mut buf)
}

/// Kendall's tau of a sequence against its sorted order: `1 - 4I / (n(n-1))`.
pub fn kendall_tau_perm<T: Ord + Copy>(perm: &[T]) -> Result<f64, StatsError> {
    let n = perm.len();
    if n < 2 {
        return Err(StatsError::TooShort { n });
    }
    let inv = inversion_count(perm) as f64;
    let n = n as f64;
    Ok(1.0 - 4.0 * inv / (n * (n - 1.0)))
}

/// Kendall's tau between two tie-free sequences.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    check_pair(x, y)?;
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].partial_cmp(&x[b]).unwrap_or(Ordering::Equal));
    if order.windows(2).any(|w| x[w[0]] == x[w[1]]) {
        return Err(StatsError::Ties);
    }
    // rank of y in x-order; inversions there are the discordant pairs
    let y_ranks = average_ranks(y);
    if has_fractional(&y_ranks) {
        return Err(StatsError::Ties);
    }
    let seq: Vec<u64> = order.iter().map(|&i| y_ranks[i] as u64).collect();
    kendall_tau_perm(&seq)
}

fn has_fractional(ranks: &[f64]) -> bool {
    ranks.iter().any(|r| r.fract() != 0.0)
}
