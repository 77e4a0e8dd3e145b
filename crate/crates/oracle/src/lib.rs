//! Slow, direct reference implementations.
//!
//! Everything here is written from the textbook definition with no shared code
//! paths into `ivtr-core`, so the test suites can use these as independent
//! oracles.

/// AUROC by counting every (positive, negative) pair; ties count one half.
pub fn auroc_pairs(pos: &[f64], neg: &[f64]) -> f64 {
    let mut wins = 0u64;
    let mut ties = 0u64;
    for &p in pos {
        for &n in neg {
            if p > n {
                wins += 1;
            } else if p == n {
                ties += 1;
            }
        }
    }
    (wins as f64 + 0.5 * ties as f64) / (pos.len() as f64 * neg.len() as f64)
}

/// Pearson r from the pairwise form `sum_{i<j} (x_i - x_j)(y_i - y_j)`.
pub fn pearson_pairwise(x: &[f64], y: &[f64]) -> f64 {
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let dx = x[i] - x[j];
            let dy = y[i] - y[j];
            sxy += dx * dy;
            sxx += dx * dx;
            syy += dy * dy;
        }
    }
    sxy / (sxx * syy).sqrt()
}

/// Rank of each value as `1 + #smaller + #equal_others / 2`.
pub fn ranks_by_counting(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|&v| {
            let smaller = x.iter().filter(|&&u| u < v).count() as f64;
            let equal = x.iter().filter(|&&u| u == v).count() as f64 - 1.0;
            1.0 + smaller + equal / 2.0
        })
        .collect()
}

/// Spearman rho with ties: Pearson on counted ranks.
pub fn spearman_counting(x: &[f64], y: &[f64]) -> f64 {
    pearson_pairwise(&ranks_by_counting(x), &ranks_by_counting(y))
}

/// Tie-free Spearman rho, `1 - 6 sum d^2 / (n (n^2 - 1))`.
pub fn spearman_sum_d2(x: &[f64], y: &[f64]) -> f64 {
    let rx = ranks_by_counting(x);
    let ry = ranks_by_counting(y);
    let d2: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - b) * (a - b)).sum();
    let n = x.len() as f64;
    1.0 - 6.0 * d2 / (n * (n * n - 1.0))
}

/// Kendall tau-a: (concordant - discordant) / (n choose 2).
pub fn kendall_pairs(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let mut s = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            let p = (x[i] - x[j]) * (y[i] - y[j]);
            if p > 0.0 {
                s += 1;
            } else if p < 0.0 {
                s -= 1;
            }
        }
    }
    s as f64 / (n * (n - 1) / 2) as f64
}

/// Pairs `i < j` with `v[i] > v[j]`.
pub fn inversions_pairs<T: PartialOrd>(v: &[T]) -> u64 {
    let mut c = 0;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            if v[i] > v[j] {
                c += 1;
            }
        }
    }
    c
}

/// Householder reduction of the symmetric matrix `a` (row-major `n x n`) to
/// tridiagonal form: returns the diagonal and the subdiagonal.
pub fn tridiagonalize(a: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut m = a.to_vec();
    for k in 0..n.saturating_sub(2) {
        let norm = (k + 1..n).map(|i| m[i * n + k] * m[i * n + k]).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if m[(k + 1) * n + k] > 0.0 { -norm } else { norm };
        let mut v = vec![0.0; n];
        for i in k + 1..n {
            v[i] = m[i * n + k];
        }
        v[k + 1] -= alpha;
        let vn = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if vn == 0.0 {
            continue;
        }
        for x in &mut v {
            *x /= vn;
        }
        // m <- (I - 2vv^T) m (I - 2vv^T)
        for j in 0..n {
            let s: f64 = (0..n).map(|i| v[i] * m[i * n + j]).sum();
            for i in 0..n {
                m[i * n + j] -= 2.0 * v[i] * s;
            }
        }
        for i in 0..n {
            let s: f64 = (0..n).map(|j| m[i * n + j] * v[j]).sum();
            for j in 0..n {
                m[i * n + j] -= 2.0 * s * v[j];
            }
        }
    }
    let diag = (0..n).map(|i| m[i * n + i]).collect();
    let sub = (1..n).map(|i| m[i * n + i - 1]).collect();
    (diag, sub)
}

/// Number of eigenvalues of a symmetric tridiagonal matrix below `sigma`,
/// by the Sturm sequence.
pub fn sturm_count(diag: &[f64], sub: &[f64], sigma: f64) -> usize {
    let scale = diag.iter().chain(sub).fold(0.0f64, |s, v| s.max(v.abs())).max(1.0);
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let e2 = if i == 0 { 0.0 } else { sub[i - 1] * sub[i - 1] };
        q = diag[i] - sigma - e2 / q;
        if q == 0.0 {
            q = -f64::EPSILON * scale;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Number of eigenvalues of the symmetric matrix `a` below `sigma`.
pub fn count_below(a: &[f64], n: usize, sigma: f64) -> usize {
    let (d, e) = tridiagonalize(a, n);
    sturm_count(&d, &e, sigma)
}

/// The `k`-th smallest eigenvalue (0-based) by bisection on Sturm counts.
pub fn eigenvalue_bisection(a: &[f64], n: usize, k: usize) -> f64 {
    let (d, e) = tridiagonalize(a, n);
    // Gershgorin bounds of the tridiagonal form
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { e[i - 1].abs() } else { 0.0 } + if i + 1 < n { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(&d, &e, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for i in 0..a.len() {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if na == 0.0 && nb == 0.0 {
        1.0
    } else if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0)
    }
}

/// Lastde raw score written out loop by loop: `mean(L) / max(MDE, eps)`.
pub fn lastde_brute(l: &[f64], m: usize, bins: usize, scales: usize, eps: f64) -> f64 {
    let mut mde = 0.0;
    for s in 1..=scales {
        let blocks = l.len() / s;
        let mut g = Vec::new();
        for b in 0..blocks {
            let mut sum = 0.0;
            for i in 0..s {
                sum += l[b * s + i];
            }
            g.push(sum / s as f64);
        }
        let n_windows = g.len() + 1 - m;
        let mut counts = vec![0.0; bins];
        let mut total = 0.0;
        for i in 0..n_windows - 1 {
            let c = cosine(&g[i..i + m], &g[i + 1..i + 1 + m]);
            let mut b = ((c + 1.0) / 2.0 * bins as f64).floor() as usize;
            if b >= bins {
                b = bins - 1;
            }
            counts[b] += 1.0;
            total += 1.0;
        }
        let mut h = 0.0;
        for c in counts {
            if c > 0.0 {
                let p: f64 = c / total;
                h -= p * p.ln();
            }
        }
        mde += h / (bins as f64).ln();
    }
    mde /= scales as f64;
    let mean = l.iter().sum::<f64>() / l.len() as f64;
    mean / mde.max(eps)
}
