//! Shared fixtures for the criterion benchmarks in `benches/`.

use rand::Rng;

use bftc_core::{PointCloud, RngSeed};

/// `n` points uniform in the unit cube of dimension `d`.
pub fn uniform_cloud(n: usize, d: usize, seed: RngSeed) -> PointCloud {
    let mut rng = seed.rng();
    let coords: Vec<f64> = (0..n * d).map(|_| rng.random()).collect();
    PointCloud::new(coords, d).expect("finite coordinates")
}
