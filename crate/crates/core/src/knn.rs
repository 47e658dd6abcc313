//! Exact k-nearest-neighbour graph and the global filtration scale grid.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::pointcloud::PointCloud;

#[derive(Debug, Error, PartialEq)]
pub enum KnnError {
    #[error("k must satisfy 1 <= k <= n-1 (k={k}, n={n})")]
    InvalidK { k: usize, n: usize },
    #[error("degenerate cloud: largest k-th neighbour distance is {0}")]
    DegenerateScale(f64),
    #[error("filtration length must be at least 1")]
    InvalidLength,
}

/// Ordered neighbour lists, nearest first, self excluded.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborGraph {
    k: usize,
    neighbors: Vec<usize>,
    distances: Vec<f64>,
}

impl NeighborGraph {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.neighbors.len() / self.k
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i * self.k..(i + 1) * self.k]
    }

    pub fn distances(&self, i: usize) -> &[f64] {
        &self.distances[i * self.k..(i + 1) * self.k]
    }

    pub fn num_edges(&self) -> usize {
        self.neighbors.len()
    }
}

#[inline]
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Brute-force exact k-NN. Ties in distance go to the smaller index.
pub fn build_knn(pc: &PointCloud, k: usize) -> Result<NeighborGraph, KnnError> {
    let n = pc.len();
    if k < 1 || k >= n {
        return Err(KnnError::InvalidK { k, n });
    }
    let rows: Vec<(Vec<usize>, Vec<f64>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = pc.point(i);
            let mut cand: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (euclidean(xi, pc.point(j)), j))
                .collect();
            let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
            if k < cand.len() {
                cand.select_nth_unstable_by(k - 1, cmp);
                cand.truncate(k);
            }
            cand.sort_unstable_by(cmp);
            cand.into_iter().map(|(d, j)| (j, d)).unzip()
        })
        .collect();
    let mut neighbors = Vec::with_capacity(n * k);
    let mut distances = Vec::with_capacity(n * k);
    for (nb, ds) in rows {
        neighbors.extend(nb);
        distances.extend(ds);
    }
    Ok(NeighborGraph {
        k,
        neighbors,
        distances,
    })
}

/// Largest k-th neighbour distance over all points.
pub fn max_kth_distance(g: &NeighborGraph) -> f64 {
    (0..g.len())
        .map(|i| g.distances(i)[g.k - 1])
        .fold(0.0, f64::max)
}

/// Equally spaced scales `l * D / L` for `l = 1..=L`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleGrid {
    pub max_distance: f64,
    pub epsilons: Vec<f64>,
}

impl ScaleGrid {
    pub fn len(&self) -> usize {
        self.epsilons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epsilons.is_empty()
    }
}

pub fn scale_grid(max_distance: f64, length: usize) -> Result<ScaleGrid, KnnError> {
    if !(max_distance > 0.0) || !max_distance.is_finite() {
        return Err(KnnError::DegenerateScale(max_distance));
    }
    if length < 1 {
        return Err(KnnError::InvalidLength);
    }
    let mut epsilons: Vec<f64> = (1..=length)
        .map(|l| l as f64 * max_distance / length as f64)
        .collect();
    // l * D / L is exact at l = L in IEEE arithmetic, pinned regardless
    epsilons[length - 1] = max_distance;
    Ok(ScaleGrid {
        max_distance,
        epsilons,
    })
}
