use approx::assert_abs_diff_eq;

use super::*;
use crate::stats::LogisticConfig;

fn single(g: [f64; 2], s: [f64; 2]) -> QuadrupleSet {
    build_quadruples(
        &[g.to_vec()],
        &[vec![0.0, 0.0]],
        &[s.to_vec()],
        &[vec![0.0, 0.0]],
        PairingMode::CartesianMean,
        0,
    )
    .unwrap()
}

#[test]
fn single_quadruple_differences() {
    let q = single([1.0, 0.0], [0.0, 1.0]);
    assert_eq!(q.v_g, vec![vec![1.0, 0.0]]);
    assert_eq!(q.v_s, vec![vec![0.0, 1.0]]);
    assert_eq!(q.quadruple_count, 1);
}

#[test]
fn cartesian_count_is_product_of_class_sizes() {
    let v = vec![vec![0.0; 3]; 150];
    let q = build_quadruples(&v, &v, &v, &v, PairingMode::CartesianMean, 1).unwrap();
    assert_eq!(q.quadruple_count, 150u64.pow(4));
    assert_eq!(q.v_g.len(), 1);
}

#[test]
fn random_matched_is_seeded() {
    let mk = |off: f64| (0..7).map(|i| vec![i as f64 + off, -(i as f64)]).collect::<Vec<_>>();
    let (a, b, c, d) = (mk(0.0), mk(0.5), mk(1.0), mk(2.0)[..5].to_vec());
    let q1 = build_quadruples(&a, &b, &c, &d, PairingMode::RandomMatched, 9).unwrap();
    let q2 = build_quadruples(&a, &b, &c, &d, PairingMode::RandomMatched, 9).unwrap();
    assert_eq!(q1, q2);
    assert_eq!(q1.v_g.len(), 5);
    assert_eq!(q1.v_s.len(), 5);
}

#[test]
fn quadruple_errors() {
    let v = vec![vec![1.0, 2.0]];
    assert!(matches!(
        build_quadruples(&[], &v, &v, &v, PairingMode::CartesianMean, 0),
        Err(InversionError::EmptyClass(_))
    ));
    assert!(matches!(
        build_quadruples(&v, &v, &[vec![1.0]], &v, PairingMode::CartesianMean, 0),
        Err(InversionError::DimensionMismatch { expected: 2, got: 1 })
    ));
}

#[test]
fn matrix_examples() {
    let m = build_inversion_matrix(&single([1.0, 0.0], [0.0, 1.0])).unwrap();
    assert_eq!(m.a, Matrix::from_rows(&[vec![0.0, 0.5], vec![0.5, 0.0]]));

    let u = vec![1.0, -2.0, 0.5];
    let q = QuadrupleSet {
        pairing_mode: PairingMode::RandomMatched,
        v_g: vec![u.clone()],
        v_s: vec![u.clone()],
        seed: 0,
        quadruple_count: 1,
    };
    let a = build_inversion_matrix(&q).unwrap().a;
    for i in 0..3 {
        for j in 0..3 {
            assert_eq!(a[(i, j)], u[i] * u[j]);
        }
    }

    let q = QuadrupleSet {
        pairing_mode: PairingMode::RandomMatched,
        v_g: vec![vec![1.0, 2.0], vec![-1.0, -2.0]],
        v_s: vec![vec![3.0, 1.0], vec![3.0, 1.0]],
        seed: 0,
        quadruple_count: 2,
    };
    assert_eq!(build_inversion_matrix(&q).unwrap().a, Matrix::zeros(2, 2));
}

#[test]
fn hand_eigen_case() {
    let m = build_inversion_matrix(&single([1.0, 0.0], [0.0, 1.0])).unwrap();
    let inv = extract_inverted_direction(&m).unwrap();
    assert_abs_diff_eq!(inv.lambda_min, -0.5, epsilon = 1e-12);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    assert_abs_diff_eq!(inv.direction.vector()[0], h, epsilon = 1e-12);
    assert_abs_diff_eq!(inv.direction.vector()[1], -h, epsilon = 1e-12);
    assert!(inv.direction.orientation_anchor() > 0.0);
    assert_abs_diff_eq!(inv.rayleigh, inv.lambda_min, epsilon = 1e-12);
    assert!(!inv.degenerate_spectrum);
    assert!(!inv.weak_inversion);
}

#[test]
fn rank_one_gram_is_degenerate() {
    let u = vec![1.0, 2.0, 2.0];
    let q = QuadrupleSet {
        pairing_mode: PairingMode::RandomMatched,
        v_g: vec![u.clone()],
        v_s: vec![u.clone()],
        seed: 0,
        quadruple_count: 1,
    };
    let inv = extract_inverted_direction(&build_inversion_matrix(&q).unwrap()).unwrap();
    assert_abs_diff_eq!(inv.lambda_min, 0.0, epsilon = 1e-12);
    let dot: f64 = inv.direction.vector().iter().zip(&u).map(|(a, b)| a * b).sum();
    assert_abs_diff_eq!(dot, 0.0, epsilon = 1e-12);
    assert!(inv.degenerate_spectrum);
    assert!(inv.weak_inversion);
}

#[test]
fn feature_value_examples() {
    let w = FeatureDirection::new(vec![0.6, 0.8], Provenance::Inverted, 0.0).unwrap();
    assert_abs_diff_eq!(feature_value(&[3.0, 4.0], &w).unwrap(), 5.0, epsilon = 1e-12);
    assert_abs_diff_eq!(feature_value(&[0.6, 0.8], &w).unwrap(), 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(feature_value(&[-0.8, 0.6], &w).unwrap(), 0.0, epsilon = 1e-12);
    assert!(feature_value(&[1.0], &w).is_err());
}

#[test]
fn feature_value_difference_examples() {
    let w = FeatureDirection::new(vec![1.0, 0.0], Provenance::Inverted, 0.0).unwrap();
    let mgt = vec![vec![2.0, 7.0], vec![4.0, -1.0]];
    let hwt = vec![vec![1.0, 0.0], vec![1.0, 3.0]];
    assert_eq!(feature_value_difference(&mgt, &hwt, &w, DiffNormalization::MeanGap).unwrap(), 2.0);
    assert_eq!(feature_value_difference(&mgt, &hwt, &w, DiffNormalization::RawCartesian).unwrap(), 8.0);
    assert_eq!(feature_value_difference(&mgt, &mgt, &w, DiffNormalization::MeanGap).unwrap(), 0.0);

    let neg = FeatureDirection::new(vec![-1.0, 0.0], Provenance::Inverted, 0.0).unwrap();
    assert_eq!(feature_value_difference(&mgt, &hwt, &neg, DiffNormalization::MeanGap).unwrap(), -2.0);
    assert!(matches!(
        feature_value_difference(&[], &hwt, &w, DiffNormalization::MeanGap),
        Err(InversionError::EmptyClass(_))
    ));
}

#[test]
fn consistency_of_repeated_pair_is_perfect() {
    let pair = DomainPair {
        general: ClassSets {
            mgt: vec![vec![1.0, 0.2, 0.0], vec![1.2, -0.1, 0.3], vec![0.9, 0.0, -0.2]],
            hwt: vec![vec![-1.0, 0.1, 0.1], vec![-0.8, 0.0, -0.3], vec![-1.1, -0.2, 0.0]],
        },
        personalized: ClassSets {
            mgt: vec![vec![-1.0, 2.1, 0.2], vec![-0.9, 1.9, 0.0], vec![-1.2, 2.0, -0.1]],
            hwt: vec![vec![1.0, 2.0, 0.1], vec![1.1, 2.2, -0.2], vec![0.8, 1.8, 0.3]],
        },
    };
    let pairs = vec![pair.clone(), pair.clone(), pair];
    let r = direction_consistency_study(&pairs, &LogisticConfig::default(), PairingMode::CartesianMean, 3).unwrap();
    for m in [r.mean_abs_cos_inverted, r.mean_abs_cos_mgt, r.mean_abs_cos_domain] {
        assert_abs_diff_eq!(m, 1.0, epsilon = 1e-12);
    }
    assert_eq!(r.domain_generalization, vec![1.0; 3]);
}
