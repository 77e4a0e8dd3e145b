use ivtr_core::detectors::{lastde_raw, DetectorConfig, DetectorKind, LastdeConfig};
use ivtr_core::{ClassLabel, DomainLabel, TextRecord, TokenScoreRecord};
use ivtr_oracle::lastde_brute;
use proptest::prelude::*;
use rand::Rng;

fn seq(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ivtr_core::seeding::rng(seed, &[]);
    (0..n).map(|_| -rng.random_range(0.0..6.0)).collect()
}

#[test]
fn lastde_matches_brute_force() {
    let cfg = LastdeConfig::default();
    for seed in 0..50 {
        let l = seq(seed, 64);
        let got = lastde_raw(&l, &cfg, false).unwrap();
        let want = lastde_brute(&l, cfg.m, cfg.bins, cfg.scales, cfg.epsilon_de);
        assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "seed {seed}: {got} vs {want}");
    }
}

#[test]
fn single_scale_lastde_matches_brute_force() {
    for (m, bins) in [(2, 2), (3, 7), (5, 10)] {
        let cfg = LastdeConfig {
            m,
            bins,
            scales: 1,
            ..LastdeConfig::default()
        };
        let l = seq(m as u64, 40);
        let got = lastde_raw(&l, &cfg, false).unwrap();
        assert!((got - lastde_brute(&l, m, bins, 1, cfg.epsilon_de)).abs() <= 1e-12 * got.abs().max(1.0));
    }
}

fn record(scores: Vec<TokenScoreRecord>) -> TextRecord {
    TextRecord {
        id: "t".into(),
        tokens: (0..=scores.len()).map(|i| format!("w{i}")).collect(),
        class_label: ClassLabel::Mgt,
        domain_label: DomainLabel::General,
        subdomain: "s".into(),
        generator: "g".into(),
        scores: Some(scores),
        activation_ref: None,
        needs_scoring: false,
        variant: None,
    }
}

fn scores(seed: u64, n: usize) -> Vec<TokenScoreRecord> {
    let mut rng = ivtr_core::seeding::rng(seed, &[1]);
    (0..n)
        .map(|i| {
            let h: f64 = rng.random_range(0.1..5.0);
            let logp = -rng.random_range(0.0..8.0);
            TokenScoreRecord {
                token_text: format!("w{i}"),
                logp_actual: logp,
                rank: rng.random_range(1..500),
                entropy: h,
                cond_mean_logp: -h,
                cond_var_logp: rng.random_range(0.1..3.0),
                sampled_logp: Some((0..8).map(|_| -rng.random_range(0.0..8.0)).collect()),
            }
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn order_free_detectors_ignore_permutation(seed in any::<u64>(), n in 2usize..40, rot in 1usize..40) {
        let s = scores(seed, n);
        let mut r = s.clone();
        r.rotate_left(rot % n);
        r.reverse();
        let cfg = DetectorConfig::default();
        for kind in [DetectorKind::LogLik, DetectorKind::LogRank, DetectorKind::Entropy, DetectorKind::Lrr, DetectorKind::FastDetectGpt] {
            let a = kind.raw(&record(s.clone()), &cfg).unwrap();
            let b = kind.raw(&record(r.clone()), &cfg).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{}", kind);
        }
    }
}

#[test]
fn order_sensitive_detectors_see_permutation() {
    let cfg = DetectorConfig::default();
    let s = scores(42, 40);
    let mut r = s.clone();
    r.sort_by(|a, b| a.logp_actual.total_cmp(&b.logp_actual));
    for kind in [DetectorKind::Lastde, DetectorKind::LastdePp] {
        assert_ne!(kind.raw(&record(s.clone()), &cfg).unwrap(), kind.raw(&record(r.clone()), &cfg).unwrap(), "{kind}");
    }
}
