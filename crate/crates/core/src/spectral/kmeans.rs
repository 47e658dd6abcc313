use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::SpectralError;
use crate::pointcloud::RngSeed;

pub const KMEANS_MAX_ITER: usize = 300;
pub const KMEANS_RESTARTS: usize = 10;

/// Cluster id per point, each below `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterLabels {
    pub labels: Vec<usize>,
    pub k: usize,
}

/// One Lloyd run: labels, final objective and the objective after every
/// assignment step.
#[derive(Debug, Clone)]
pub struct KMeansRun {
    pub labels: Vec<usize>,
    pub inertia: f64,
    pub history: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// k-means++ seeding: first centre uniform, then proportional to squared
/// distance from the nearest chosen centre.
fn plus_plus(rows: &[f64], dim: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = rows.len() / dim;
    let point = |i: usize| &rows[i * dim..(i + 1) * dim];
    let mut centers = Vec::with_capacity(k * dim);
    centers.extend_from_slice(point(rng.random_range(0..n)));
    let mut nearest: Vec<f64> = (0..n).map(|i| sq_dist(point(i), &centers[..dim])).collect();
    for _ in 1..k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in nearest.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let start = centers.len();
        centers.extend_from_slice(point(pick));
        for (i, d) in nearest.iter_mut().enumerate() {
            *d = d.min(sq_dist(point(i), &centers[start..start + dim]));
        }
    }
    centers
}

/// Lloyd iterations from k-means++ seeding. Stops when no assignment changes
/// or after [`KMEANS_MAX_ITER`] iterations.
pub fn lloyd(rows: &[f64], dim: usize, k: usize, rng: &mut ChaCha8Rng) -> KMeansRun {
    let n = rows.len() / dim;
    let point = |i: usize| &rows[i * dim..(i + 1) * dim];
    let mut centers = plus_plus(rows, dim, k, rng);
    let mut labels = vec![usize::MAX; n];
    let mut dists = vec![0.0; n];
    let mut history = Vec::new();

    for _ in 0..KMEANS_MAX_ITER {
        let mut changed = false;
        for i in 0..n {
            let (mut best, mut best_d) = (0, f64::INFINITY);
            for c in 0..k {
                let d = sq_dist(point(i), &centers[c * dim..(c + 1) * dim]);
                if d < best_d {
                    best = c;
                    best_d = d;
                }
            }
            changed |= labels[i] != best;
            labels[i] = best;
            dists[i] = best_d;
        }
        history.push(dists.iter().sum());

        // empty clusters take the point farthest from its centroid
        let mut counts = vec![0usize; k];
        labels.iter().for_each(|&l| counts[l] += 1);
        for c in 0..k {
            if counts[c] > 0 {
                continue;
            }
            let far = (0..n)
                .filter(|&i| counts[labels[i]] > 1)
                .max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a)));
            if let Some(i) = far {
                counts[labels[i]] -= 1;
                counts[c] += 1;
                labels[i] = c;
                dists[i] = 0.0;
                changed = true;
            }
        }

        centers.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..n {
            let c = labels[i];
            centers[c * dim..(c + 1) * dim]
                .iter_mut()
                .zip(point(i))
                .for_each(|(a, b)| *a += b);
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c * dim..(c + 1) * dim]
                    .iter_mut()
                    .for_each(|v| *v /= counts[c] as f64);
            }
        }
        if !changed {
            break;
        }
    }
    let inertia = (0..n)
        .map(|i| sq_dist(point(i), &centers[labels[i] * dim..(labels[i] + 1) * dim]))
        .sum();
    KMeansRun {
        labels,
        inertia,
        history,
    }
}

/// Best of [`KMEANS_RESTARTS`] seeded runs by within-cluster sum of squares.
/// `rows` is row-major with `dim` columns.
pub fn kmeans(rows: &[f64], dim: usize, k: usize, seed: RngSeed) -> Result<ClusterLabels, SpectralError> {
    let n = rows.len().checked_div(dim).unwrap_or(0);
    if k < 1 || k > n {
        return Err(SpectralError::InvalidClusterCount { p: k, n });
    }
    let mut best: Option<KMeansRun> = None;
    for r in 0..KMEANS_RESTARTS {
        let run = lloyd(rows, dim, k, &mut seed.derive(r as u64).rng());
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(ClusterLabels {
        labels: best.expect("at least one restart").labels,
        k,
    })
}
