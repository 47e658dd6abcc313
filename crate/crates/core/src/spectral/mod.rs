//! Topology-aware weighted graph, Laplacian, eigen-embedding and k-means.

mod eigen;
mod kmeans;
mod tridiagonal;

use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pointcloud::PointCloud;

pub use eigen::{connected_components, smallest_eigenvectors, Embedding, DENSE_CUTOFF};
pub use kmeans::{kmeans, lloyd, ClusterLabels, KMeansRun, KMEANS_MAX_ITER, KMEANS_RESTARTS};

#[derive(Debug, Error, PartialEq)]
pub enum SpectralError {
    #[error("need at least two points to estimate the data spread, got {0}")]
    TooFewPoints(usize),
    #[error("degenerate cloud: all points coincide")]
    DegenerateCloud,
    #[error("kernel bandwidth must be positive, got {0}")]
    InvalidSigma(f64),
    #[error("adjacency is not symmetric at ({0}, {1})")]
    Asymmetric(usize, usize),
    #[error("cluster count {p} out of range for {n} points")]
    InvalidClusterCount { p: usize, n: usize },
    #[error("eigensolver did not converge after {0} Lanczos steps")]
    NoConvergence(usize),
    #[error("neighbour lists cover {got} points, cloud has {expected}")]
    ShapeMismatch { got: usize, expected: usize },
    #[error("unknown kernel '{0}' (valid: gaussian, none)")]
    UnknownKernel(String),
}

/// Edge weighting for mutual neighbours.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    /// `exp(-‖x_i - x_j‖² / 2σ²)`.
    #[default]
    Gaussian,
    /// Unit weight on every mutual edge.
    None,
}

impl FromStr for KernelKind {
    type Err = SpectralError;

    fn from_str(s: &str) -> Result<Self, SpectralError> {
        match s {
            "gaussian" => Ok(KernelKind::Gaussian),
            "none" => Ok(KernelKind::None),
            _ => Err(SpectralError::UnknownKernel(s.to_owned())),
        }
    }
}

/// Root total variance about the centroid, `sqrt(trace(cov))` with `1/n`.
pub fn data_sigma(pc: &PointCloud) -> Result<f64, SpectralError> {
    let n = pc.len();
    if n < 2 {
        return Err(SpectralError::TooFewPoints(n));
    }
    let d = pc.dim();
    let mut mean = vec![0.0; d];
    for p in pc.points() {
        mean.iter_mut().zip(p).for_each(|(m, x)| *m += x);
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let ss: f64 = pc
        .points()
        .map(|p| p.iter().zip(&mean).map(|(x, m)| (x - m) * (x - m)).sum::<f64>())
        .sum();
    let sigma = (ss / n as f64).sqrt();
    if sigma > 0.0 {
        Ok(sigma)
    } else {
        Err(SpectralError::DegenerateCloud)
    }
}

/// Sparse symmetric `A′`, zero diagonal; row `i` lists `(j, weight)` by
/// ascending `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedAdjacency {
    rows: Vec<Vec<(usize, f64)>>,
}

impl WeightedAdjacency {
    /// Wraps raw rows (sorted by column on construction). Symmetry is checked
    /// by [`laplacian`].
    pub fn from_rows(mut rows: Vec<Vec<(usize, f64)>>) -> Self {
        rows.iter_mut().for_each(|r| r.sort_by_key(|e| e.0));
        Self { rows }
    }

    /// Nonzero off-diagonal entries of a dense square matrix.
    pub fn from_dense(m: &[Vec<f64>]) -> Self {
        Self::from_rows(
            m.iter()
                .enumerate()
                .map(|(i, r)| {
                    r.iter()
                        .enumerate()
                        .filter(|&(j, &w)| j != i && w != 0.0)
                        .map(|(j, &w)| (j, w))
                        .collect()
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i]
            .binary_search_by_key(&j, |e| e.0)
            .map_or(0.0, |at| self.rows[i][at].1)
    }

    /// Undirected edge count.
    pub fn num_edges(&self) -> usize {
        self.rows.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut m = vec![vec![0.0; n]; n];
        for (i, r) in self.rows.iter().enumerate() {
            for &(j, w) in r {
                m[i][j] = w;
            }
        }
        m
    }

    fn check_symmetric(&self) -> Result<(), SpectralError> {
        for (i, r) in self.rows.iter().enumerate() {
            for &(j, w) in r {
                if j >= self.len() || j == i || self.get(j, i).to_bits() != w.to_bits() {
                    return Err(SpectralError::Asymmetric(i, j));
                }
            }
        }
        Ok(())
    }
}

/// `A′_ij = w(‖x_i − x_j‖)` when `i` and `j` keep each other after pruning.
pub fn build_adjacency(
    pc: &PointCloud,
    nprime: &[Vec<usize>],
    sigma: f64,
    kernel: KernelKind,
) -> Result<WeightedAdjacency, SpectralError> {
    if nprime.len() != pc.len() {
        return Err(SpectralError::ShapeMismatch {
            got: nprime.len(),
            expected: pc.len(),
        });
    }
    if !(sigma > 0.0) {
        return Err(SpectralError::InvalidSigma(sigma));
    }
    let two_sigma_sq = 2.0 * sigma * sigma;
    let rows = (0..pc.len())
        .into_par_iter()
        .map(|i| {
            let mut row: Vec<(usize, f64)> = nprime[i]
                .iter()
                .copied()
                .filter(|&j| j != i && nprime[j].contains(&i))
                .map(|j| {
                    let w = match kernel {
                        KernelKind::Gaussian => {
                            let d2: f64 = pc
                                .point(i)
                                .iter()
                                .zip(pc.point(j))
                                .map(|(a, b)| (a - b) * (a - b))
                                .sum();
                            (-d2 / two_sigma_sq).exp()
                        }
                        KernelKind::None => 1.0,
                    };
                    (j, w)
                })
                .collect();
            row.sort_by_key(|e| e.0);
            row.dedup_by_key(|e| e.0);
            row
        })
        .collect();
    Ok(WeightedAdjacency { rows })
}

/// Unnormalized Laplacian `D′ − A′` in sparse form.
#[derive(Debug, Clone, PartialEq)]
pub struct Laplacian {
    degree: Vec<f64>,
    adjacency: WeightedAdjacency,
}

pub fn laplacian(a: &WeightedAdjacency) -> Result<Laplacian, SpectralError> {
    a.check_symmetric()?;
    let degree = a.rows.iter().map(|r| r.iter().map(|e| e.1).sum()).collect();
    Ok(Laplacian {
        degree,
        adjacency: a.clone(),
    })
}

impl Laplacian {
    pub fn len(&self) -> usize {
        self.degree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degree.is_empty()
    }

    pub fn degree(&self) -> &[f64] {
        &self.degree
    }

    pub fn adjacency(&self) -> &WeightedAdjacency {
        &self.adjacency
    }

    /// `y = L x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let off: f64 = self.adjacency.rows[i].iter().map(|&(j, w)| w * x[j]).sum();
            *yi = self.degree[i] * x[i] - off;
        }
    }

    /// `xᵀ L x = Σ_{i<j} w_ij (x_i − x_j)²`, computed directly from `L x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let mut y = vec![0.0; x.len()];
        self.apply(x, &mut y);
        x.iter().zip(&y).map(|(a, b)| a * b).sum()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut m = self.adjacency.to_dense();
        for (i, row) in m.iter_mut().enumerate() {
            row.iter_mut().for_each(|v| *v = -*v);
            row[i] = self.degree[i];
        }
        m
    }

    /// Upper bound on the spectrum (Gershgorin): `2 max_i d_i`.
    pub fn spectral_bound(&self) -> f64 {
        2.0 * self.degree.iter().copied().fold(0.0, f64::max)
    }
}
