//! Topological clustering driven by Betti-sequence filtration.
//!
//! The pipeline runs in nine steps over a point cloud:
//!
//! 1. exact k-nearest-neighbour graph ([`knn::build_knn`]);
//! 2. a global scale grid `ε_1 < … < ε_L = D` anchored at the largest k-th
//!    neighbour distance ([`knn::scale_grid`]);
//! 3. – 4. a Vietoris–Rips filtration on every point's local neighbourhood and
//!    its Betti numbers at each grid scale ([`homology::betti_sequences`]);
//! 5. – 6. cosine similarity of neighbouring Betti sequences, whisker
//!    thresholds and neighbourhood pruning ([`topo_filter`]);
//! 7. – 9. a Gaussian-weighted mutual-neighbour graph, its unnormalized
//!    Laplacian, the `p` smallest eigenvectors and k-means
//!    ([`spectral`]).
//!
//! [`pipeline::run`] wires the steps together and [`metrics`] scores the
//! result against ground truth.

pub mod error;
pub mod homology;
pub mod knn;
pub mod metrics;
pub mod pipeline;
pub mod pointcloud;
pub mod spectral;
pub mod topo_filter;

pub use error::{Error, Result};
pub use homology::{Barcode, BettiSequence, Filtration, Simplex};
pub use knn::{NeighborGraph, ScaleGrid};
pub use metrics::ContingencyTable;
pub use pipeline::{KernelKind, PipelineOutput, RunConfig, RunReport};
pub use pointcloud::{PointCloud, RngSeed};
pub use spectral::{ClusterLabels, Embedding, Laplacian, WeightedAdjacency};
pub use topo_filter::{SimilarityKind, SimilarityTensor, Thresholds};
