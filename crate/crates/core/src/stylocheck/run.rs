use rand::seq::index::sample;
use rayon::prelude::*;
use serde::Serialize;

use super::StyloError;
use crate::seeding;
use crate::stats::{pearson, StatsError};

/// Per-detector inputs of a StyloCheck run: realized transfer gap and AUROC
/// on every probe of the pool.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectorInputs {
    pub name: String,
    pub gap: f64,
    pub probe_aurocs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub probes_per_trial: usize,
    /// Pearson r per trial; `None` when every detector tied on its probe mean.
    pub trial_r: Vec<Option<f64>>,
    /// Probe indices of each trial, ascending.
    pub members: Vec<Vec<usize>>,
    pub undefined_trials: usize,
    pub frac_r_above_05: f64,
    pub frac_r_above_07: f64,
    pub mean_r: Option<f64>,
    pub median_r: Option<f64>,
    /// Sample standard deviation; absent with fewer than two defined trials.
    pub std_r: Option<f64>,
}

fn check_inputs(rows: &[DetectorInputs], per_trial: usize) -> Result<usize, StyloError> {
    if rows.len() < 3 {
        return Err(StyloError::Precondition(format!(
            "Pearson r over detectors needs at least 3 detectors, got {}",
            rows.len()
        )));
    }
    let pool = rows[0].probe_aurocs.len();
    if rows.iter().any(|r| r.probe_aurocs.len() != pool) {
        return Err(StyloError::Precondition("detectors were evaluated on different probe pools".into()));
    }
    if per_trial == 0 || per_trial > pool {
        return Err(StyloError::Precondition(format!("{per_trial} probes per trial from a pool of {pool}")));
    }
    let g0 = rows[0].gap;
    if rows.iter().all(|r| r.gap == g0) {
        return Err(StyloError::ZeroVariance);
    }
    Ok(pool)
}

fn trial(rows: &[DetectorInputs], members: &[usize]) -> Result<Option<f64>, StatsError> {
    let means: Vec<f64> = rows
        .iter()
        .map(|r| members.iter().map(|&i| r.probe_aurocs[i]).sum::<f64>() / members.len() as f64)
        .collect();
    let gaps: Vec<f64> = rows.iter().map(|r| r.gap).collect();
    match pearson(&means, &gaps) {
        Ok(r) => Ok(Some(r)),
        Err(StatsError::ZeroVariance) => Ok(None),
        Err(e) => Err(e),
    }
}

fn summarize(per_trial: usize, trial_r: Vec<Option<f64>>, members: Vec<Vec<usize>>) -> RunSummary {
    let n = trial_r.len() as f64;
    let mut defined: Vec<f64> = trial_r.iter().flatten().copied().collect();
    defined.sort_by(f64::total_cmp);
    let frac = |t: f64| defined.iter().filter(|&&r| r > t).count() as f64 / n;
    let k = defined.len();
    let mean = (k > 0).then(|| defined.iter().sum::<f64>() / k as f64);
    let median = (k > 0).then(|| {
        if k % 2 == 1 {
            defined[k / 2]
        } else {
            0.5 * (defined[k / 2 - 1] + defined[k / 2])
        }
    });
    let std = match (mean, k) {
        (Some(m), k) if k >= 2 => Some((defined.iter().map(|r| (r - m).powi(2)).sum::<f64>() / (k - 1) as f64).sqrt()),
        _ => None,
    };
    RunSummary {
        probes_per_trial: per_trial,
        undefined_trials: trial_r.len() - k,
        frac_r_above_05: frac(0.5),
        frac_r_above_07: frac(0.7),
        mean_r: mean,
        median_r: median,
        std_r: std,
        trial_r,
        members,
    }
}

/// Repeatedly samples `per_trial` probes, averages each detector's probe
/// AUROC over them and correlates those means with the transfer gaps.
pub fn stylocheck_run(rows: &[DetectorInputs], per_trial: usize, trials: usize, seed: u64) -> Result<RunSummary, StyloError> {
    let pool = check_inputs(rows, per_trial)?;
    let results: Vec<(Vec<usize>, Option<f64>)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = seeding::rng(seed, &[per_trial as u64, t as u64]);
            let mut m = sample(&mut rng, pool, per_trial).into_vec();
            m.sort_unstable();
            let r = trial(rows, &m)?;
            Ok((m, r))
        })
        .collect::<Result<_, StatsError>>()?;
    let (members, trial_r) = results.into_iter().unzip();
    Ok(summarize(per_trial, trial_r, members))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationRow {
    pub count: usize,
    pub mean_r: Option<f64>,
    pub std_r: Option<f64>,
    pub defined_trials: usize,
}

/// Distribution of the trial r as the number of probes per trial varies.
pub fn ablation_probe_count(
    rows: &[DetectorInputs],
    counts: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<AblationRow>, StyloError> {
    counts
        .iter()
        .map(|&c| {
            let s = stylocheck_run(rows, c, trials, seed)?;
            Ok(AblationRow {
                count: c,
                mean_r: s.mean_r,
                std_r: s.std_r,
                defined_trials: trials - s.undefined_trials,
            })
        })
        .collect()
}
