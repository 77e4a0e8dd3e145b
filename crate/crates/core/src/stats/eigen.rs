use super::{Matrix, StatsError};

/// Convergence threshold on `off(A) / ||A||_F`.
pub const EIGH_REL_TOL: f64 = 1e-12;
pub const EIGH_MAX_SWEEPS: usize = 100;
/// Largest tolerated `max |a_ij - a_ji|` before the input is rejected.
const ASYMMETRY_TOL: f64 = 1e-9;

/// Eigen-decomposition `A = U diag(eigenvalues) U^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigenResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `i` is the unit eigenvector of `eigenvalues[i]`, with its
    /// largest-magnitude component positive.
    pub eigenvectors: Matrix,
    pub sweeps: usize,
}

impl SymmetricEigenResult {
    pub fn eigenvector(&self, i: usize) -> Vec<f64> {
        self.eigenvectors.column(i)
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi eigen-decomposition of a real symmetric matrix.
///
/// The input is symmetrised as `(A + A^T) / 2` after checking that its
/// asymmetry is within `1e-9`. Sweeps stop once the off-diagonal Frobenius
/// norm is at most `1e-12 ||A||_F`.
pub fn eigh(a: &Matrix) -> Result<SymmetricEigenResult, StatsError> {
    if !a.is_square() {
        return Err(StatsError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if let Some(index) = a.as_slice().iter().position(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite { index });
    }
    let max_asymmetry = a.max_asymmetry();
    if max_asymmetry > ASYMMETRY_TOL {
        return Err(StatsError::NotSymmetric { max_asymmetry });
    }

    let n = a.rows();
    let mut w = Matrix::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
    let mut v = Matrix::identity(n);
    let threshold = EIGH_REL_TOL * w.frobenius_norm();

    let mut sweeps = 0;
    loop {
        if off_diagonal_norm(&w) <= threshold {
            break;
        }
        if sweeps == EIGH_MAX_SWEEPS {
            return Err(StatsError::DidNotConverge { iterations: sweeps });
        }
        sweeps += 1;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                rotate(&mut w, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w[(i, i)].total_cmp(&w[(j, j)]));
    let eigenvalues = order.iter().map(|&i| w[(i, i)]).collect();
    let mut eigenvectors = Matrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let mut vec = v.column(src);
        canonical_sign(&mut vec);
        for (row, x) in vec.into_iter().enumerate() {
            eigenvectors[(row, col)] = x;
        }
    }
    Ok(SymmetricEigenResult {
        eigenvalues,
        eigenvectors,
        sweeps,
    })
}

/// One Jacobi rotation annihilating `w[p][q]`; accumulates into `v`.
fn rotate(w: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let apq = w[(p, q)];
    if apq == 0.0 {
        return;
    }
    let n = w.rows();
    let theta = (w[(q, q)] - w[(p, p)]) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
    let c = 1.0 / t.hypot(1.0);
    let s = t * c;

    for k in 0..n {
        let (akp, akq) = (w[(k, p)], w[(k, q)]);
        w[(k, p)] = c * akp - s * akq;
        w[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let (apk, aqk) = (w[(p, k)], w[(q, k)]);
        w[(p, k)] = c * apk - s * aqk;
        w[(q, k)] = s * apk + c * aqk;
    }
    w[(p, q)] = 0.0;
    w[(q, p)] = 0.0;
    for k in 0..n {
        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// Flip so the first largest-magnitude component is positive.
fn canonical_sign(vec: &mut [f64]) {
    let mut best = 0;
    for (i, x) in vec.iter().enumerate() {
        if x.abs() > vec[best].abs() {
            best = i;
        }
    }
    if vec.get(best).is_some_and(|&x| x < 0.0) {
        vec.iter_mut().for_each(|x| *x = -*x);
    }
}
