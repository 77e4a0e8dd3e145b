use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{invert, feature_value_difference, DiffNormalization, FeatureDirection, InversionError, PairingMode, Provenance};
use crate::corpus_io::{ActivationTable, DomainLabel, Subset, SubsetKey};
use crate::detectors::{evaluate_detector, TextDetector};
use crate::stats::{auroc_split, classifier_direction, spearman, train_logistic, LinearClassifier, LogisticConfig, StatsError};

/// MGT and HWT activations of one domain.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClassSets {
    pub mgt: Vec<Vec<f64>>,
    pub hwt: Vec<Vec<f64>>,
}

impl ClassSets {
    pub fn from_subset(subset: &Subset, table: &ActivationTable) -> Result<Self, InversionError> {
        Ok(Self {
            mgt: table.collect(&subset.mgt)?,
            hwt: table.collect(&subset.hwt)?,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DomainPair {
    pub general: ClassSets,
    pub personalized: ClassSets,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationRow {
    pub detector: String,
    /// `None` when either column is constant.
    pub rho: Option<f64>,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyTableRow {
    pub key: SubsetKey,
    pub domain: DomainLabel,
    pub feature_gap: f64,
    /// One entry per detector, in the order given to the study.
    pub aurocs: Vec<f64>,
    pub n_excluded: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationStudy {
    pub rows: Vec<CorrelationRow>,
    pub table: Vec<StudyTableRow>,
}

/// Spearman correlation, per detector, between each subset's feature-value
/// gap along `w` and the detector's AUROC on that subset.
pub fn correlation_study(
    subsets: &[Subset],
    table: &ActivationTable,
    w: &FeatureDirection,
    detectors: &[&dyn TextDetector],
    normalization: DiffNormalization,
) -> Result<CorrelationStudy, InversionError> {
    if subsets.len() < 3 {
        return Err(InversionError::TooFewSubsets {
            needed: 3,
            got: subsets.len(),
        });
    }
    let rows: Vec<StudyTableRow> = subsets
        .par_iter()
        .map(|s| {
            let sets = ClassSets::from_subset(s, table)?;
            let feature_gap = feature_value_difference(&sets.mgt, &sets.hwt, w, normalization)?;
            let mut aurocs = Vec::with_capacity(detectors.len());
            let mut n_excluded = Vec::with_capacity(detectors.len());
            for det in detectors {
                let ev = evaluate_detector(*det, s, Some(table))?;
                aurocs.push(ev.auroc);
                n_excluded.push(ev.n_excluded);
            }
            Ok(StudyTableRow {
                key: s.key.clone(),
                domain: s.domain,
                feature_gap,
                aurocs,
                n_excluded,
            })
        })
        .collect::<Result<_, InversionError>>()?;

    let gaps: Vec<f64> = rows.iter().map(|r| r.feature_gap).collect();
    let mut out = Vec::with_capacity(detectors.len());
    for (k, det) in detectors.iter().enumerate() {
        let aurocs: Vec<f64> = rows.iter().map(|r| r.aurocs[k]).collect();
        let rho = match spearman(&gaps, &aurocs) {
            Ok(r) => Some(r),
            Err(StatsError::ZeroVariance) => None,
            Err(e) => return Err(e.into()),
        };
        out.push(CorrelationRow {
            detector: det.name().to_owned(),
            rho,
            n: rows.len(),
        });
    }
    Ok(CorrelationStudy { rows: out, table: rows })
}

/// The two linear probes of the direction-consistency study.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeClassifiers {
    /// HWT vs MGT over both domains; MGT positive.
    pub mgt: LinearClassifier,
    /// General vs personalized HWTs; personalized positive.
    pub domain: LinearClassifier,
}

pub fn train_probe_classifiers(pair: &DomainPair, cfg: &LogisticConfig) -> Result<ProbeClassifiers, InversionError> {
    let (g, s) = (&pair.general, &pair.personalized);
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (vs, label) in [(&g.mgt, true), (&g.hwt, false), (&s.mgt, true), (&s.hwt, false)] {
        x.extend(vs.iter().cloned());
        y.extend(std::iter::repeat_n(label, vs.len()));
    }
    let mgt = train_logistic(&x, &y, cfg)?;

    let x: Vec<Vec<f64>> = g.hwt.iter().chain(&s.hwt).cloned().collect();
    let y: Vec<bool> = std::iter::repeat_n(false, g.hwt.len())
        .chain(std::iter::repeat_n(true, s.hwt.len()))
        .collect();
    let domain = train_logistic(&x, &y, cfg)?;
    Ok(ProbeClassifiers { mgt, domain })
}

impl ProbeClassifiers {
    /// AUROC of the MGT probe on every text of `pair`.
    pub fn mgt_auroc(&self, pair: &DomainPair) -> Result<f64, StatsError> {
        let score = |vs: &[Vec<f64>]| vs.iter().map(|v| self.mgt.decision(v)).collect::<Vec<_>>();
        let mut pos = score(&pair.general.mgt);
        pos.extend(score(&pair.personalized.mgt));
        let mut neg = score(&pair.general.hwt);
        neg.extend(score(&pair.personalized.hwt));
        auroc_split(&pos, &neg)
    }

    /// AUROC of the domain probe on the HWTs of `pair`.
    pub fn domain_auroc(&self, pair: &DomainPair) -> Result<f64, StatsError> {
        let score = |vs: &[Vec<f64>]| vs.iter().map(|v| self.domain.decision(v)).collect::<Vec<_>>();
        auroc_split(&score(&pair.personalized.hwt), &score(&pair.general.hwt))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    /// Pairwise `|cos|` between the directions of different pairs, per family.
    pub inverted_cos: Vec<Vec<f64>>,
    pub mgt_cos: Vec<Vec<f64>>,
    pub domain_cos: Vec<Vec<f64>>,
    pub mean_abs_cos_inverted: f64,
    pub mean_abs_cos_mgt: f64,
    pub mean_abs_cos_domain: f64,
    /// Each pair's classifier evaluated on a seeded choice of another pair.
    pub mgt_generalization: Vec<f64>,
    pub domain_generalization: Vec<f64>,
    pub degenerate_pairs: usize,
}

fn cos_matrix(dirs: &[FeatureDirection]) -> (Vec<Vec<f64>>, f64) {
    let n = dirs.len();
    let m: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| dirs[i].cosine(&dirs[j]).abs()).collect())
        .collect();
    let mut sum = 0.0;
    let mut count = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            sum += m[i][j];
            count += 1;
        }
    }
    (m, sum / count as f64)
}

/// Extracts the inverted, MGT-probe and domain-probe directions from each
/// (general, personalized) pair and compares them across pairs.
pub fn direction_consistency_study(
    pairs: &[DomainPair],
    cfg: &LogisticConfig,
    mode: PairingMode,
    seed: u64,
) -> Result<ConsistencyReport, InversionError> {
    let n = pairs.len();
    if n < 2 {
        return Err(InversionError::TooFewSubsets { needed: 2, got: n });
    }
    type PerPair = (FeatureDirection, bool, ProbeClassifiers, FeatureDirection, FeatureDirection);
    let fitted: Vec<PerPair> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let (_, inv) = invert(&p.general, &p.personalized, mode, crate::seeding::derive_seed(seed, &[i as u64]))?;
            let probes = train_probe_classifiers(p, cfg)?;
            let wm = classifier_direction(&probes.mgt, Provenance::MgtClassifier)?;
            let wd = classifier_direction(&probes.domain, Provenance::DomainClassifier)?;
            Ok((inv.direction, inv.degenerate_spectrum, probes, wm, wd))
        })
        .collect::<Result<_, InversionError>>()?;

    let partners: Vec<usize> = (0..n)
        .map(|i| {
            let mut rng = crate::seeding::rng(seed, &[0xc0f1, i as u64]);
            let j = rng.random_range(0..n - 1);
            if j >= i {
                j + 1
            } else {
                j
            }
        })
        .collect();
    let generalization: Vec<(f64, f64)> = fitted
        .par_iter()
        .zip(&partners)
        .map(|(f, &j)| Ok((f.2.mgt_auroc(&pairs[j])?, f.2.domain_auroc(&pairs[j])?)))
        .collect::<Result<_, StatsError>>()?;

    let inv: Vec<_> = fitted.iter().map(|f| f.0.clone()).collect();
    let wm: Vec<_> = fitted.iter().map(|f| f.3.clone()).collect();
    let wd: Vec<_> = fitted.iter().map(|f| f.4.clone()).collect();
    let (inverted_cos, mean_abs_cos_inverted) = cos_matrix(&inv);
    let (mgt_cos, mean_abs_cos_mgt) = cos_matrix(&wm);
    let (domain_cos, mean_abs_cos_domain) = cos_matrix(&wd);
    Ok(ConsistencyReport {
        inverted_cos,
        mgt_cos,
        domain_cos,
        mean_abs_cos_inverted,
        mean_abs_cos_mgt,
        mean_abs_cos_domain,
        mgt_generalization: generalization.iter().map(|g| g.0).collect(),
        domain_generalization: generalization.iter().map(|g| g.1).collect(),
        degenerate_pairs: fitted.iter().filter(|f| f.1).count(),
    })
}
