use std::cmp::Ordering;

use super::HomologyError;

/// A simplex on local vertex indices, entering the filtration at the largest
/// pairwise distance among its vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Simplex {
    vertices: Vec<usize>,
    pub filtration_value: f64,
}

impl Simplex {
    pub fn new(vertices: Vec<usize>, filtration_value: f64) -> Result<Self, HomologyError> {
        if vertices.is_empty() || vertices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(HomologyError::InvalidSimplex(vertices));
        }
        Ok(Self {
            vertices,
            filtration_value,
        })
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    fn filtration_order(&self, other: &Self) -> Ordering {
        self.filtration_value
            .total_cmp(&other.filtration_value)
            .then(self.vertices.len().cmp(&other.vertices.len()))
            .then_with(|| self.vertices.cmp(&other.vertices))
    }
}

/// Simplices sorted by (value, dimension, lexicographic vertices).
#[derive(Debug, Clone, PartialEq)]
pub struct Filtration {
    simplices: Vec<Simplex>,
    max_dim: usize,
}

impl Filtration {
    /// Sorts `simplices` into filtration order. `max_dim` is the dimension cap
    /// the complex was expanded to; face-closure is checked by the reduction.
    pub fn new(mut simplices: Vec<Simplex>, max_dim: usize) -> Result<Self, HomologyError> {
        if let Some(s) = simplices.iter().find(|s| s.dim() > max_dim) {
            return Err(HomologyError::InvalidSimplex(s.vertices.clone()));
        }
        simplices.sort_by(Simplex::filtration_order);
        Ok(Self { simplices, max_dim })
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    /// Number of simplices of each dimension `0..=max_dim`.
    pub fn counts_by_dim(&self) -> Vec<usize> {
        let mut c = vec![0; self.max_dim + 1];
        for s in &self.simplices {
            c[s.dim()] += 1;
        }
        c
    }
}

/// Symmetric matrix of pairwise distances for a small point set.
pub fn distance_matrix<P: AsRef<[f64]>>(points: &[P]) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = crate::knn::euclidean(points[i].as_ref(), points[j].as_ref());
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    d
}

/// Flag complex of the `max_scale` proximity graph, truncated at `max_dim`.
pub fn build_vr_filtration<P: AsRef<[f64]>>(
    points: &[P],
    max_dim: usize,
    max_scale: f64,
) -> Filtration {
    vr_from_distances(&distance_matrix(points), max_dim, max_scale)
}

pub fn vr_from_distances(dist: &[Vec<f64>], max_dim: usize, max_scale: f64) -> Filtration {
    let n = dist.len();
    // higher-indexed neighbours within scale, ascending
    let up: Vec<Vec<usize>> = (0..n)
        .map(|i| (i + 1..n).filter(|&j| dist[i][j] <= max_scale).collect())
        .collect();

    let mut simplices = Vec::new();
    let mut stack = Vec::with_capacity(max_dim + 1);
    for v in 0..n {
        stack.clear();
        stack.push(v);
        simplices.push(Simplex {
            vertices: vec![v],
            filtration_value: 0.0,
        });
        if max_dim > 0 {
            expand(dist, &up, &mut stack, &up[v], 0.0, max_dim, &mut simplices);
        }
    }
    simplices.sort_by(Simplex::filtration_order);
    Filtration { simplices, max_dim }
}

fn expand(
    dist: &[Vec<f64>],
    up: &[Vec<usize>],
    stack: &mut Vec<usize>,
    candidates: &[usize],
    value: f64,
    max_dim: usize,
    out: &mut Vec<Simplex>,
) {
    for (ci, &w) in candidates.iter().enumerate() {
        let enter = stack.iter().map(|&u| dist[u][w]).fold(value, f64::max);
        stack.push(w);
        out.push(Simplex {
            vertices: stack.clone(),
            filtration_value: enter,
        });
        if stack.len() <= max_dim {
            let next: Vec<usize> = candidates[ci + 1..]
                .iter()
                .copied()
                .filter(|x| up[w].binary_search(x).is_ok())
                .collect();
            if !next.is_empty() {
                expand(dist, up, stack, &next, enter, max_dim, out);
            }
        }
        stack.pop();
    }
}
