use ivtr_core::stats::{auroc, auroc_split, eigh, kendall_tau, kendall_tau_perm, pearson, spearman, Label, Matrix, ScoredSample};
use ivtr_oracle as oracle;
use proptest::prelude::*;
use rand::Rng;

fn tied_scores(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    // few distinct values so ties are common
    (0..n).map(|_| (rng.random_range(0..40) as f64) / 4.0).collect()
}

#[test]
fn auroc_matches_pair_counting_on_seeded_sets() {
    let mut rng = ivtr_core::seeding::rng(11, &[]);
    for _ in 0..100 {
        let p = rng.random_range(1..300);
        let n = rng.random_range(1..300);
        let pos = tied_scores(&mut rng, p);
        let neg = tied_scores(&mut rng, n);
        assert_eq!(auroc_split(&pos, &neg).unwrap(), oracle::auroc_pairs(&pos, &neg));
    }
}

proptest! {
    #[test]
    fn auroc_equals_pair_count(
        pos in prop::collection::vec(-5i32..5, 1..60),
        neg in prop::collection::vec(-5i32..5, 1..60),
    ) {
        let pos: Vec<f64> = pos.into_iter().map(f64::from).collect();
        let neg: Vec<f64> = neg.into_iter().map(f64::from).collect();
        let samples: Vec<ScoredSample> = pos
            .iter()
            .map(|&s| ScoredSample::new(s, Label::Positive))
            .chain(neg.iter().map(|&s| ScoredSample::new(s, Label::Negative)))
            .collect();
        prop_assert_eq!(auroc(&samples).unwrap(), oracle::auroc_pairs(&pos, &neg));
    }

    #[test]
    fn auroc_complements_under_negation(
        pos in prop::collection::vec(-1e3f64..1e3, 1..40),
        neg in prop::collection::vec(-1e3f64..1e3, 1..40),
    ) {
        let a = auroc_split(&pos, &neg).unwrap();
        let np: Vec<f64> = pos.iter().map(|x| -x).collect();
        let nn: Vec<f64> = neg.iter().map(|x| -x).collect();
        prop_assert!((auroc_split(&np, &nn).unwrap() - (1.0 - a)).abs() < 1e-12);
    }

    #[test]
    fn correlations_are_symmetric_and_shift_invariant(
        xy in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 3..50),
        c in -50.0f64..50.0,
    ) {
        let (x, y): (Vec<f64>, Vec<f64>) = xy.into_iter().unzip();
        if let (Ok(a), Ok(b)) = (pearson(&x, &y), pearson(&y, &x)) {
            prop_assert!((a - b).abs() < 1e-12);
            let xs: Vec<f64> = x.iter().map(|v| v + c).collect();
            prop_assert!((pearson(&xs, &y).unwrap() - a).abs() < 1e-9);
        }
        if let (Ok(a), Ok(b)) = (spearman(&x, &y), spearman(&y, &x)) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn correlations_match_direct_formulas() {
    let mut rng = ivtr_core::seeding::rng(12, &[]);
    for case in 0..200 {
        let n = rng.random_range(3..120);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let y: Vec<f64> = x.iter().map(|v| 0.3 * v + rng.random_range(-10.0..10.0)).collect();
        assert!((pearson(&x, &y).unwrap() - oracle::pearson_pairwise(&x, &y)).abs() <= 1e-12, "case {case}");
        assert!((spearman(&x, &y).unwrap() - oracle::spearman_counting(&x, &y)).abs() <= 1e-12);
        assert_eq!(spearman(&x, &y).unwrap(), oracle::spearman_sum_d2(&x, &y));
        assert!((kendall_tau(&x, &y).unwrap() - oracle::kendall_pairs(&x, &y)).abs() <= 1e-12);

        let tx = tied_scores(&mut rng, n);
        let ty = tied_scores(&mut rng, n);
        if let Ok(r) = spearman(&tx, &ty) {
            assert!((r - oracle::spearman_counting(&tx, &ty)).abs() <= 1e-12);
        }
    }
}

#[test]
fn kendall_of_permutations() {
    let mut rng = ivtr_core::seeding::rng(13, &[]);
    for _ in 0..50 {
        let n = rng.random_range(2..200);
        let mut p: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            p.swap(i, rng.random_range(0..=i));
        }
        let i = oracle::inversions_pairs(&p) as f64;
        let nf = n as f64;
        assert_eq!(kendall_tau_perm(&p).unwrap(), 1.0 - 4.0 * i / (nf * (nf - 1.0)));
    }
}

fn random_symmetric(rng: &mut impl Rng, d: usize) -> Matrix {
    let mut m = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..=i {
            let v = rng.random_range(-1.0..1.0);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

#[test]
fn eigh_matches_bisection_eigenvalues() {
    let mut rng = ivtr_core::seeding::rng(14, &[]);
    for d in [3, 8, 16] {
        for _ in 0..5 {
            let a = random_symmetric(&mut rng, d);
            let e = eigh(&a).unwrap();
            for (k, &lam) in e.eigenvalues.iter().enumerate() {
                let want = oracle::eigenvalue_bisection(a.as_slice(), d, k);
                assert!((lam - want).abs() < 1e-9, "d {d} k {k}: {lam} vs {want}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigh_reconstructs(seed in any::<u64>(), d in 1usize..12) {
        let mut rng = ivtr_core::seeding::rng(seed, &[]);
        let a = random_symmetric(&mut rng, d);
        let e = eigh(&a).unwrap();
        prop_assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        let u = &e.eigenvectors;
        let mut lam = Matrix::zeros(d, d);
        for i in 0..d {
            lam[(i, i)] = e.eigenvalues[i];
        }
        let rec = u.mul(&lam).mul(&u.transpose());
        prop_assert!(rec.sub(&a).frobenius_norm() <= 1e-9 * a.frobenius_norm().max(1.0));
        let g = u.transpose().mul(u);
        prop_assert!(g.sub(&Matrix::identity(d)).frobenius_norm() <= 1e-9);
    }
}
