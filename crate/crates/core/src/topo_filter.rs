//! Betti-sequence similarity on k-NN edges, whisker thresholds and pruning.

use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::homology::BettiSequence;
use crate::knn::NeighborGraph;

#[derive(Debug, Error, PartialEq)]
pub enum FilterError {
    #[error("sequence length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("expected Betti sequences for {expected} points, got {got}")]
    MissingSequence { expected: usize, got: usize },
    #[error("no similarity scores in dimension {0}")]
    EmptyPool(usize),
    #[error("threshold count {got} does not match {expected} homology dimensions")]
    ThresholdCount { got: usize, expected: usize },
    #[error("unknown similarity '{0}' (valid: cosine, l2)")]
    UnknownSimilarity(String),
}

/// How two Betti rows are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimilarityKind {
    #[default]
    Cosine,
    /// `1 / (1 + ‖u - v‖₂)`, the L2 ablation mapped onto `(0, 1]`.
    L2,
}

impl FromStr for SimilarityKind {
    type Err = FilterError;

    fn from_str(s: &str) -> Result<Self, FilterError> {
        match s {
            "cosine" => Ok(SimilarityKind::Cosine),
            "l2" => Ok(SimilarityKind::L2),
            _ => Err(FilterError::UnknownSimilarity(s.to_owned())),
        }
    }
}

/// Cosine of two nonnegative rows. Both zero gives 1, exactly one zero gives 0.
pub fn cosine_similarity(u: &[u32], v: &[u32]) -> Result<f64, FilterError> {
    if u.len() != v.len() {
        return Err(FilterError::LengthMismatch(u.len(), v.len()));
    }
    let (mut dot, mut uu, mut vv) = (0.0f64, 0.0f64, 0.0f64);
    for (&a, &b) in u.iter().zip(v) {
        let (a, b) = (a as f64, b as f64);
        dot += a * b;
        uu += a * a;
        vv += b * b;
    }
    Ok(match (uu == 0.0, vv == 0.0) {
        (true, true) => 1.0,
        (true, false) | (false, true) => 0.0,
        // uu * vv is an exact integer, so identical inputs give exactly 1
        _ => (dot / (uu * vv).sqrt()).clamp(0.0, 1.0),
    })
}

pub fn l2_similarity(u: &[u32], v: &[u32]) -> Result<f64, FilterError> {
    if u.len() != v.len() {
        return Err(FilterError::LengthMismatch(u.len(), v.len()));
    }
    let d2: f64 = u
        .iter()
        .zip(v)
        .map(|(&a, &b)| (a as f64 - b as f64).powi(2))
        .sum();
    Ok(1.0 / (1.0 + d2.sqrt()))
}

impl SimilarityKind {
    pub fn score(self, u: &[u32], v: &[u32]) -> Result<f64, FilterError> {
        match self {
            SimilarityKind::Cosine => cosine_similarity(u, v),
            SimilarityKind::L2 => l2_similarity(u, v),
        }
    }
}

/// Scores `(d_ij)^m` for every directed k-NN edge, laid out as
/// `[point][neighbour slot][dimension]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityTensor {
    k: usize,
    dims: usize,
    scores: Vec<f64>,
}

impl SimilarityTensor {
    /// Builds a tensor from raw scores; `scores.len()` must be a multiple of
    /// `k * dims`.
    pub fn from_raw(k: usize, dims: usize, scores: Vec<f64>) -> Self {
        assert!(k > 0 && dims > 0 && scores.len().is_multiple_of(k * dims));
        Self { k, dims, scores }
    }

    pub fn num_points(&self) -> usize {
        self.scores.len() / (self.k * self.dims)
    }

    /// `M + 1`.
    pub fn num_dims(&self) -> usize {
        self.dims
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Scores of point `i`'s `slot`-th neighbour, one per dimension.
    pub fn edge(&self, i: usize, slot: usize) -> &[f64] {
        let at = (i * self.k + slot) * self.dims;
        &self.scores[at..at + self.dims]
    }

    /// All directed-edge scores of dimension `m`.
    pub fn pool(&self, m: usize) -> impl Iterator<Item = f64> + '_ {
        self.scores.iter().skip(m).step_by(self.dims).copied()
    }

    /// CSV with columns `point,neighbor_slot,dim,score`.
    pub fn write_csv<W: Write>(&self, w: W, g: &NeighborGraph) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["point", "neighbor", "dim", "score"])?;
        for i in 0..self.num_points() {
            for (slot, &j) in g.neighbors(i).iter().enumerate() {
                for (m, s) in self.edge(i, slot).iter().enumerate() {
                    w.write_record([i.to_string(), j.to_string(), m.to_string(), s.to_string()])?;
                }
            }
        }
        w.flush()
    }
}

pub fn edge_similarities(
    g: &NeighborGraph,
    seqs: &[BettiSequence],
    kind: SimilarityKind,
) -> Result<SimilarityTensor, FilterError> {
    if seqs.len() != g.len() {
        return Err(FilterError::MissingSequence {
            expected: g.len(),
            got: seqs.len(),
        });
    }
    let dims = seqs.first().map_or(1, BettiSequence::num_dims);
    let rows: Vec<Vec<f64>> = (0..g.len())
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::with_capacity(g.k() * dims);
            for &j in g.neighbors(i) {
                if seqs[j].num_dims() != dims {
                    return Err(FilterError::LengthMismatch(seqs[i].num_dims(), seqs[j].num_dims()));
                }
                for m in 0..dims {
                    out.push(kind.score(seqs[i].row(m), seqs[j].row(m))?);
                }
            }
            Ok(out)
        })
        .collect::<Result<_, _>>()?;
    Ok(SimilarityTensor {
        k: g.k(),
        dims,
        scores: rows.concat(),
    })
}

/// Global per-dimension lower bounds `α_0..α_M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub alphas: Vec<f64>,
}

/// Percentile of a sorted sample with linear interpolation between order
/// statistics (position `q * (n - 1)`).
pub fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Lower whisker `Q1 - 1.5 IQR` of a score pool, clamped at 0.
pub fn lower_whisker(scores: &mut [f64]) -> Option<f64> {
    if scores.is_empty() {
        return None;
    }
    scores.sort_by(f64::total_cmp);
    let q1 = percentile_sorted(scores, 0.25);
    let q3 = percentile_sorted(scores, 0.75);
    Some((q1 - 1.5 * (q3 - q1)).max(0.0))
}

pub fn whisker_thresholds(t: &SimilarityTensor) -> Result<Thresholds, FilterError> {
    let alphas = (0..t.num_dims())
        .map(|m| {
            let mut pool: Vec<f64> = t.pool(m).collect();
            lower_whisker(&mut pool).ok_or(FilterError::EmptyPool(m))
        })
        .collect::<Result<_, _>>()?;
    Ok(Thresholds { alphas })
}

/// Keeps `j ∈ N(x_i)` iff every dimension's score reaches its threshold.
pub fn prune_neighborhoods(
    g: &NeighborGraph,
    t: &SimilarityTensor,
    a: &Thresholds,
) -> Result<Vec<Vec<usize>>, FilterError> {
    if a.alphas.len() != t.num_dims() {
        return Err(FilterError::ThresholdCount {
            got: a.alphas.len(),
            expected: t.num_dims(),
        });
    }
    if t.num_points() != g.len() || t.k() != g.k() {
        return Err(FilterError::MissingSequence {
            expected: g.len(),
            got: t.num_points(),
        });
    }
    Ok((0..g.len())
        .map(|i| {
            g.neighbors(i)
                .iter()
                .enumerate()
                .filter(|&(slot, _)| t.edge(i, slot).iter().zip(&a.alphas).all(|(s, al)| s >= al))
                .map(|(_, &j)| j)
                .collect()
        })
        .collect())
}
