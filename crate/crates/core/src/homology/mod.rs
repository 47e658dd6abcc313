//! Local Vietoris–Rips persistence and Betti sequences.
//!
//! Every point `x_i` gets a filtration on `{x_i} ∪ N(x_i)`, capped at the
//! global scale `D` and at simplex dimension `M + 1`. Its barcode is sampled
//! on the shared scale grid to give an `(M + 1) x L` matrix of Betti numbers.

mod barcode;
mod filtration;
pub mod oracle;

use std::io::Write;

use rayon::prelude::*;
use thiserror::Error;

use crate::knn::{NeighborGraph, ScaleGrid};
use crate::pointcloud::PointCloud;

pub use barcode::{betti_at_scale, compute_barcode, compute_barcode_with, Barcode, Interval, Reduction};
pub use filtration::{build_vr_filtration, distance_matrix, vr_from_distances, Filtration, Simplex};
pub use oracle::betti_bruteforce;

#[derive(Debug, Error, PartialEq)]
pub enum HomologyError {
    #[error("point index {index} out of range for {n} points")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("invalid simplex {0:?}: vertices must be nonempty and strictly ascending")]
    InvalidSimplex(Vec<usize>),
    #[error("filtration is not face-closed: {0}")]
    NotFaceClosed(String),
    #[error("filtration capped at dimension {have}, need {need} for the requested homology")]
    InsufficientDimension { have: usize, need: usize },
    #[error("homology dimension {m} out of range (max {max})")]
    DimensionOutOfRange { m: usize, max: usize },
    #[error("brute-force oracle limited to {max} points, got {n}")]
    OracleTooLarge { n: usize, max: usize },
    #[error("scale grid and neighbour graph disagree with the point cloud")]
    ShapeMismatch,
}

/// `(M + 1) x L` Betti numbers of one point's local filtration; row `m`
/// holds `β_m` at each grid scale.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BettiSequence {
    values: Vec<u32>,
    len: usize,
}

impl BettiSequence {
    pub fn from_rows(rows: Vec<Vec<u32>>) -> Self {
        let len = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == len), "ragged Betti rows");
        Self {
            values: rows.concat(),
            len,
        }
    }

    pub fn row(&self, m: usize) -> &[u32] {
        &self.values[m * self.len..(m + 1) * self.len]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u32]> {
        self.values.chunks_exact(self.len)
    }

    /// `M + 1`.
    pub fn num_dims(&self) -> usize {
        self.values.len() / self.len
    }

    /// `L`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

/// `x_i` followed by its neighbours, nearest first.
pub fn local_point_set<'a>(
    pc: &'a PointCloud,
    g: &NeighborGraph,
    i: usize,
) -> Result<Vec<&'a [f64]>, HomologyError> {
    if i >= pc.len() || i >= g.len() {
        return Err(HomologyError::IndexOutOfRange { index: i, n: pc.len() });
    }
    Ok(std::iter::once(pc.point(i))
        .chain(g.neighbors(i).iter().map(|&j| pc.point(j)))
        .collect())
}

/// Barcode of the local filtration around point `i`, dimensions `0..=M`.
pub fn local_barcode(
    pc: &PointCloud,
    g: &NeighborGraph,
    max_scale: f64,
    max_hom_dim: usize,
    i: usize,
) -> Result<Barcode, HomologyError> {
    let local = local_point_set(pc, g, i)?;
    let f = build_vr_filtration(&local, max_hom_dim + 1, max_scale);
    compute_barcode(&f, max_hom_dim)
}

pub fn sample_barcode(b: &Barcode, grid: &ScaleGrid) -> BettiSequence {
    let len = grid.len();
    let dims = b.max_hom_dim() + 1;
    let mut values = vec![0u32; dims * len];
    for m in 0..dims {
        for iv in b.nontrivial(m) {
            for (l, &eps) in grid.epsilons.iter().enumerate() {
                if iv.contains(eps) {
                    values[m * len + l] += 1;
                }
            }
        }
    }
    BettiSequence { values, len }
}

/// Betti sequences of every point, in point order.
pub fn betti_sequences(
    pc: &PointCloud,
    g: &NeighborGraph,
    grid: &ScaleGrid,
    max_hom_dim: usize,
) -> Result<Vec<BettiSequence>, HomologyError> {
    betti_sequences_with_barcodes(pc, g, grid, max_hom_dim, false).map(|(s, _)| s)
}

/// As [`betti_sequences`], optionally keeping each point's barcode.
pub fn betti_sequences_with_barcodes(
    pc: &PointCloud,
    g: &NeighborGraph,
    grid: &ScaleGrid,
    max_hom_dim: usize,
    keep_barcodes: bool,
) -> Result<(Vec<BettiSequence>, Option<Vec<Barcode>>), HomologyError> {
    if g.len() != pc.len() || grid.is_empty() {
        return Err(HomologyError::ShapeMismatch);
    }
    let per_point: Vec<(BettiSequence, Option<Barcode>)> = (0..pc.len())
        .into_par_iter()
        .map(|i| {
            let b = local_barcode(pc, g, grid.max_distance, max_hom_dim, i)?;
            let seq = sample_barcode(&b, grid);
            Ok((seq, keep_barcodes.then_some(b)))
        })
        .collect::<Result<_, HomologyError>>()?;
    let (seqs, barcodes): (Vec<_>, Vec<_>) = per_point.into_iter().unzip();
    let barcodes = keep_barcodes.then(|| barcodes.into_iter().flatten().collect());
    Ok((seqs, barcodes))
}

/// One JSON object per interval: `{"point":i,"dim":m,"birth":b,"death":d}`,
/// with `"inf"` standing in for an infinite death.
pub fn write_barcodes_jsonl<W: Write>(mut w: W, barcodes: &[Barcode]) -> std::io::Result<()> {
    for (i, b) in barcodes.iter().enumerate() {
        for m in 0..=b.max_hom_dim() {
            for iv in b.intervals(m) {
                let death = if iv.is_essential() {
                    serde_json::Value::from("inf")
                } else {
                    serde_json::Value::from(iv.death)
                };
                let line = serde_json::json!({
                    "point": i,
                    "dim": m,
                    "birth": iv.birth,
                    "death": death,
                });
                writeln!(w, "{line}")?;
            }
        }
    }
    Ok(())
}
