//! Numerical kernel: rank statistics, correlation coefficients, a dense
//! symmetric eigensolver and logistic-regression probes.

mod eigen;
mod logistic;
mod matrix;
mod rank;

pub use eigen::{eigh, SymmetricEigenResult, EIGH_MAX_SWEEPS, EIGH_REL_TOL};
pub use logistic::{
    classifier_direction, train_logistic, LinearClassifier, LogisticConfig, TrainingMeta,
};
pub use matrix::Matrix;
pub use rank::{
    auroc, auroc_split, average_ranks, inversion_count, kendall_tau, kendall_tau_perm,
    mann_whitney_u, pearson, spearman, Label, ScoredSample,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("both classes are required, got {positives} positives and {negatives} negatives")]
    OneClassOnly { positives: usize, negatives: usize },
    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("zero variance input")]
    ZeroVariance,
    #[error("need at least 2 observations, got {n}")]
    TooShort { n: usize },
    #[error("tied values are not supported here")]
    Ties,
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (max asymmetry {max_asymmetry:e})")]
    NotSymmetric { max_asymmetry: f64 },
    #[error("Jacobi iteration did not converge after {iterations} sweeps")]
    DidNotConverge { iterations: usize },
    #[error("classifier weights are all zero")]
    ZeroWeights,
    #[error("empty input")]
    Empty,
}
