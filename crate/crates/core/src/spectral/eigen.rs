//! Smallest eigenpairs of a graph Laplacian.
//!
//! The spectrum of `L′` is the union of the spectra of its connected
//! components, and each component contributes exactly one zero eigenvalue
//! with a constant eigenvector. Components are therefore solved separately:
//! the zero mode is written down exactly, and the remaining low modes come
//! from a dense solver (small components) or Lanczos with full
//! reorthogonalization against the constant vector (large ones).

use std::io::Write;

use nalgebra::DMatrix;
use rand::Rng;

use super::tridiagonal::smallest_eigenpairs;
use super::{Laplacian, SpectralError};
use crate::pointcloud::RngSeed;

/// Components up to this size use the dense symmetric solver.
pub const DENSE_CUTOFF: usize = 300;

const LANCZOS_TOL: f64 = 1e-10;

/// `n x p` spectral embedding, columns ordered by ascending eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    n: usize,
    p: usize,
    /// row-major
    data: Vec<f64>,
    pub eigenvalues: Vec<f64>,
}

impl Embedding {
    pub fn num_points(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.data[i * self.p + j]).collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(w);
        w.write_record((0..self.p).map(|j| format!("u{j}")))?;
        for i in 0..self.n {
            w.write_record(self.row(i).iter().map(|v| v.to_string()))?;
        }
        w.flush()
    }
}

/// Connected components of the weighted graph, each sorted ascending, in
/// order of their smallest vertex.
pub fn connected_components(l: &Laplacian) -> Vec<Vec<usize>> {
    let n = l.len();
    let mut comp = vec![usize::MAX; n];
    let mut out = Vec::new();
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut members = vec![start];
        comp[start] = id;
        let mut head = 0;
        while head < members.len() {
            let v = members[head];
            head += 1;
            for &(w, _) in l.adjacency().row(v) {
                if comp[w] == usize::MAX {
                    comp[w] = id;
                    members.push(w);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

struct Candidate {
    value: f64,
    component: usize,
    vector: Vec<f64>,
}

/// The `p` eigenpairs of `l` with smallest eigenvalues.
///
/// Zero modes of different components are ordered by component size
/// (largest first, then smallest vertex). Each eigenvector's largest-magnitude
/// entry is made positive.
pub fn smallest_eigenvectors(l: &Laplacian, p: usize) -> Result<Embedding, SpectralError> {
    let n = l.len();
    if p < 1 || p > n {
        return Err(SpectralError::InvalidClusterCount { p, n });
    }
    let mut components = connected_components(l);
    // stable: ties keep smallest-vertex order
    components.sort_by_key(|c| std::cmp::Reverse(c.len()));

    let mut candidates: Vec<Candidate> = components
        .iter()
        .enumerate()
        .take(p)
        .map(|(c, members)| Candidate {
            value: 0.0,
            component: c,
            vector: vec![(1.0 / members.len() as f64).sqrt(); members.len()],
        })
        .collect();

    let extra = p.saturating_sub(components.len());
    if extra > 0 {
        for (c, members) in components.iter().enumerate() {
            let want = extra.min(members.len() - 1);
            if want == 0 {
                continue;
            }
            let sub = SubLaplacian::new(l, members);
            let pairs = if members.len() <= DENSE_CUTOFF {
                sub.dense_nonzero_modes(want)
            } else {
                sub.lanczos_nonzero_modes(want, RngSeed(members[0] as u64))?
            };
            candidates.extend(pairs.into_iter().map(|(value, vector)| Candidate {
                value,
                component: c,
                vector,
            }));
        }
    }
    candidates.sort_by(|a, b| a.value.total_cmp(&b.value).then(a.component.cmp(&b.component)));
    candidates.truncate(p);

    let mut data = vec![0.0; n * p];
    let mut eigenvalues = Vec::with_capacity(p);
    for (j, cand) in candidates.iter().enumerate() {
        let members = &components[cand.component];
        let (mut best, mut sign) = (0.0, 1.0);
        for &x in &cand.vector {
            if x.abs() > best {
                best = x.abs();
                sign = x.signum();
            }
        }
        for (&i, &x) in members.iter().zip(&cand.vector) {
            data[i * p + j] = sign * x;
        }
        eigenvalues.push(cand.value);
    }
    Ok(Embedding {
        n,
        p,
        data,
        eigenvalues,
    })
}

/// Laplacian restricted to one connected component, in local indices.
struct SubLaplacian {
    degree: Vec<f64>,
    rows: Vec<Vec<(usize, f64)>>,
    bound: f64,
}

impl SubLaplacian {
    fn new(l: &Laplacian, members: &[usize]) -> Self {
        let rows = members
            .iter()
            .map(|&g| {
                l.adjacency()
                    .row(g)
                    .iter()
                    .map(|&(w, x)| (members.binary_search(&w).expect("edge leaves component"), x))
                    .collect()
            })
            .collect();
        let degree: Vec<f64> = members.iter().map(|&g| l.degree()[g]).collect();
        let bound = 2.0 * degree.iter().copied().fold(0.0, f64::max);
        Self { degree, rows, bound }
    }

    fn len(&self) -> usize {
        self.degree.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let off: f64 = self.rows[i].iter().map(|&(j, w)| w * x[j]).sum();
            *yi = self.degree[i] * x[i] - off;
        }
    }

    fn dense_nonzero_modes(&self, want: usize) -> Vec<(f64, Vec<f64>)> {
        let s = self.len();
        let mut m = DMatrix::<f64>::zeros(s, s);
        for i in 0..s {
            m[(i, i)] = self.degree[i];
            for &(j, w) in &self.rows[i] {
                m[(i, j)] = -w;
            }
        }
        let eig = m.symmetric_eigen();
        let mut order: Vec<usize> = (0..s).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let inv_sqrt = 1.0 / (s as f64).sqrt();
        // the smallest mode is the constant vector; strip any residual of it
        order
            .into_iter()
            .skip(1)
            .take(want)
            .map(|k| {
                let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
                let c: f64 = v.iter().sum::<f64>() * inv_sqrt;
                v.iter_mut().for_each(|x| *x -= c * inv_sqrt);
                normalize(&mut v);
                (eig.eigenvalues[k].max(0.0), v)
            })
            .collect()
    }

    /// Lanczos with full reorthogonalization on the complement of the
    /// constant vector. Breakdowns restart from a fresh random direction, so
    /// repeated eigenvalues are still found.
    fn lanczos_nonzero_modes(
        &self,
        want: usize,
        seed: RngSeed,
    ) -> Result<Vec<(f64, Vec<f64>)>, SpectralError> {
        let s = self.len();
        let max_steps = s - 1;
        let mut rng = seed.rng();
        let inv_sqrt = 1.0 / (s as f64).sqrt();
        let deflate = |v: &mut [f64]| {
            let c: f64 = v.iter().sum::<f64>() * inv_sqrt;
            v.iter_mut().for_each(|x| *x -= c * inv_sqrt);
        };
        let scale = self.bound.max(f64::MIN_POSITIVE);

        let mut basis: Vec<Vec<f64>> = Vec::new();
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();

        let fresh = |basis: &[Vec<f64>], rng: &mut rand_chacha::ChaCha8Rng| -> Option<Vec<f64>> {
            for _ in 0..8 {
                let mut v: Vec<f64> = (0..s).map(|_| rng.random::<f64>() - 0.5).collect();
                for _ in 0..2 {
                    deflate(&mut v);
                    orthogonalize(&mut v, basis);
                }
                if normalize(&mut v) > 1e-8 {
                    return Some(v);
                }
            }
            None
        };

        let mut v = fresh(&basis, &mut rng).ok_or(SpectralError::NoConvergence(0))?;
        let mut w = vec![0.0; s];
        let mut next_check = (2 * want + 20).min(max_steps);
        loop {
            self.apply(&v, &mut w);
            let a: f64 = w.iter().zip(&v).map(|(x, y)| x * y).sum();
            w.iter_mut().zip(&v).for_each(|(x, y)| *x -= a * y);
            if let (Some(prev), Some(&b)) = (basis.last(), beta.last()) {
                w.iter_mut().zip(prev).for_each(|(x, y)| *x -= b * y);
            }
            alpha.push(a);
            basis.push(std::mem::take(&mut v));
            for _ in 0..2 {
                deflate(&mut w);
                orthogonalize(&mut w, &basis);
            }
            let b = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            let steps = basis.len();

            let exhausted = steps >= max_steps;
            if steps >= next_check || exhausted || b <= 1e-12 * scale {
                let off = &beta[..];
                let pairs = smallest_eigenpairs(&alpha, off, want.min(steps));
                let converged = pairs.len() == want
                    && pairs
                        .iter()
                        .all(|(_, y)| (b * y[steps - 1]).abs() <= LANCZOS_TOL * scale);
                if converged || exhausted {
                    return Ok(pairs
                        .into_iter()
                        .map(|(value, y)| {
                            let mut x = vec![0.0; s];
                            for (coef, q) in y.iter().zip(&basis) {
                                x.iter_mut().zip(q).for_each(|(a, b)| *a += coef * b);
                            }
                            normalize(&mut x);
                            (value.max(0.0), x)
                        })
                        .collect());
                }
                next_check = (steps + steps / 4 + 10).min(max_steps);
            }

            if b <= 1e-12 * scale {
                // invariant subspace: continue from a new orthogonal direction
                v = fresh(&basis, &mut rng).ok_or(SpectralError::NoConvergence(steps))?;
                beta.push(0.0);
            } else {
                v = w.iter().map(|x| x / b).collect();
                beta.push(b);
            }
        }
    }
}

fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    for q in basis {
        let dot: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
        v.iter_mut().zip(q).for_each(|(a, b)| *a -= dot * b);
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}
