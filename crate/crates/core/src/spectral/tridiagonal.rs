//! Smallest eigenpairs of a symmetric tridiagonal matrix: Sturm-sequence
//! bisection for values, inverse iteration for vectors.

/// Number of eigenvalues strictly below `x`. `diag` has length n, `off` n-1.
fn sturm_count(diag: &[f64], off: &[f64], x: f64, pivmin: f64) -> usize {
    let mut count = 0;
    let mut q = diag[0] - x;
    if q.abs() < pivmin {
        q = -pivmin;
    }
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        q = diag[i] - x - off[i - 1] * off[i - 1] / q;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn gershgorin(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    (lo, hi)
}

/// The `count` smallest eigenvalues, ascending.
pub fn smallest_eigenvalues(diag: &[f64], off: &[f64], count: usize) -> Vec<f64> {
    let (glo, ghi) = gershgorin(diag, off);
    let scale = glo.abs().max(ghi.abs()).max(f64::MIN_POSITIVE);
    let pivmin = f64::MIN_POSITIVE * off.iter().map(|b| b * b).fold(1.0, f64::max);
    let tol = 4.0 * f64::EPSILON * scale;
    let mut out = Vec::with_capacity(count);
    let mut lo = glo - tol;
    for k in 0..count.min(diag.len()) {
        // smallest x with more than k eigenvalues below it
        let mut l = lo;
        let mut h = ghi + tol;
        for _ in 0..200 {
            if h - l <= tol {
                break;
            }
            let mid = 0.5 * (l + h);
            if sturm_count(diag, off, mid, pivmin) > k {
                h = mid;
            } else {
                l = mid;
            }
        }
        let value = 0.5 * (l + h);
        out.push(value);
        lo = l;
    }
    out
}

/// Solves `(T - shift I) y = rhs` in place by LU with partial pivoting.
fn shifted_solve(diag: &[f64], off: &[f64], shift: f64, rhs: &mut [f64], floor: f64) {
    let n = diag.len();
    // rows of U: u0 diagonal, u1 first super, u2 second super
    let mut u0: Vec<f64> = diag.iter().map(|d| d - shift).collect();
    let mut u1: Vec<f64> = off.to_vec();
    u1.push(0.0);
    let mut u2 = vec![0.0; n];
    let mut lower: Vec<f64> = off.to_vec();
    let mut pivoted = vec![false; n];
    let mut mult = vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        if lower[i].abs() > u0[i].abs() {
            // swap rows i and i+1
            pivoted[i] = true;
            let m = u0[i] / lower[i];
            mult[i] = m;
            u0[i] = lower[i];
            let (a1, a2) = (u1[i], u2[i]);
            u1[i] = u0[i + 1];
            u2[i] = u1[i + 1];
            u0[i + 1] = a1 - m * u1[i];
            u1[i + 1] = a2 - m * u2[i];
            lower[i] = 0.0;
        } else {
            let piv = if u0[i].abs() < floor { floor } else { u0[i] };
            u0[i] = piv;
            let m = lower[i] / piv;
            mult[i] = m;
            u0[i + 1] -= m * u1[i];
            u1[i + 1] -= m * u2[i];
        }
    }
    if u0[n - 1].abs() < floor {
        u0[n - 1] = floor;
    }
    for i in 0..n.saturating_sub(1) {
        if pivoted[i] {
            rhs.swap(i, i + 1);
            rhs[i + 1] -= mult[i] * rhs[i];
        } else {
            rhs[i + 1] -= mult[i] * rhs[i];
        }
    }
    for i in (0..n).rev() {
        let mut v = rhs[i];
        if i + 1 < n {
            v -= u1[i] * rhs[i + 1];
        }
        if i + 2 < n {
            v -= u2[i] * rhs[i + 2];
        }
        rhs[i] = v / u0[i];
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

/// The `count` smallest eigenpairs of the symmetric tridiagonal matrix,
/// eigenvalues ascending and eigenvectors orthonormal.
pub fn smallest_eigenpairs(diag: &[f64], off: &[f64], count: usize) -> Vec<(f64, Vec<f64>)> {
    let n = diag.len();
    let values = smallest_eigenvalues(diag, off, count);
    let (glo, ghi) = gershgorin(diag, off);
    let scale = glo.abs().max(ghi.abs()).max(1e-300);
    let floor = f64::EPSILON * scale;
    let cluster_gap = 1e-7 * scale;
    let mut pairs: Vec<(f64, Vec<f64>)> = Vec::with_capacity(values.len());
    for (k, &lambda) in values.iter().enumerate() {
        let mut y: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.1 * (((i * 7919 + k * 104_729) % 1009) as f64 / 1009.0))
            .collect();
        normalize(&mut y);
        let cluster_start = pairs
            .iter()
            .position(|(v, _)| (lambda - v).abs() <= cluster_gap)
            .unwrap_or(pairs.len());
        for _ in 0..4 {
            shifted_solve(diag, off, lambda, &mut y, floor);
            for (_, prev) in &pairs[cluster_start..] {
                let dot: f64 = y.iter().zip(prev).map(|(a, b)| a * b).sum();
                y.iter_mut().zip(prev).for_each(|(a, b)| *a -= dot * b);
            }
            if normalize(&mut y) == 0.0 {
                y = (0..n).map(|i| if i == k % n { 1.0 } else { 0.0 }).collect();
            }
        }
        pairs.push((lambda, y));
    }
    pairs
}
