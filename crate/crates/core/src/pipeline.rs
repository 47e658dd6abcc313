//! End-to-end orchestration, run reports and parameter sweeps.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homology::{betti_sequences_with_barcodes, Barcode, BettiSequence};
use crate::knn::{build_knn, max_kth_distance, scale_grid, NeighborGraph};
use crate::metrics::{evaluate, Scores};
use crate::pointcloud::{add_gaussian_noise, gen_benchmark, load_csv, Benchmark, PointCloud, RngSeed};
use crate::spectral::{
    build_adjacency, connected_components, data_sigma, kmeans, laplacian, smallest_eigenvectors,
    ClusterLabels, Embedding, WeightedAdjacency,
};
use crate::topo_filter::{edge_similarities, prune_neighborhoods, whisker_thresholds, SimilarityTensor, Thresholds};

pub use crate::spectral::KernelKind;
pub use crate::topo_filter::SimilarityKind;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Seed streams derived from [`RunConfig::seed`].
const STREAM_DATA: u64 = 0;
const STREAM_NOISE: u64 = 1;
const STREAM_KMEANS: u64 = 2;

/// Every knob of one clustering run. Serialized verbatim into reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Benchmark name or CSV path.
    pub input: String,
    /// Ground-truth column of a CSV input.
    pub label_column: Option<String>,
    /// Neighbours per point.
    pub k: usize,
    /// Filtration length `L`.
    pub length: usize,
    /// Highest Betti dimension `M`.
    pub max_dim: usize,
    /// Cluster count `p`; defaults to the number of ground-truth classes.
    pub clusters: Option<usize>,
    pub seed: RngSeed,
    /// Standard deviation of Gaussian noise added to the input.
    pub noise: f64,
    pub similarity: SimilarityKind,
    pub kernel: KernelKind,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: "linked_tori".into(),
            label_column: None,
            k: 10,
            length: 10,
            max_dim: 1,
            clusters: None,
            seed: RngSeed(0),
            noise: 0.0,
            similarity: SimilarityKind::Cosine,
            kernel: KernelKind::Gaussian,
            output: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_owned()));
        if self.k < 1 {
            return bad("k must be at least 1");
        }
        if self.length < 1 {
            return bad("filtration length must be at least 1");
        }
        if self.clusters == Some(0) {
            return bad("cluster count must be at least 1");
        }
        if !(self.noise >= 0.0) {
            return bad("noise must be nonnegative");
        }
        Ok(())
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Loads the configured input (benchmark or CSV) and applies its noise.
pub fn load_input(cfg: &RunConfig) -> Result<PointCloud> {
    let clean = match cfg.input.parse::<Benchmark>() {
        Ok(b) => gen_benchmark(b, cfg.seed.derive(STREAM_DATA))?,
        Err(_) if Path::new(&cfg.input).exists() => load_csv(&cfg.input, cfg.label_column.as_deref())?,
        Err(e) => return Err(e.into()),
    };
    Ok(add_gaussian_noise(&clean, cfg.noise, cfg.seed.derive(STREAM_NOISE))?)
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct StageTimings {
    pub knn_ms: f64,
    pub homology_ms: f64,
    pub filter_ms: f64,
    pub graph_ms: f64,
    pub eigen_ms: f64,
    pub kmeans_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EdgeCounts {
    /// Directed k-NN edges `Σ|N(x_i)|`.
    pub knn: usize,
    /// Directed edges surviving pruning `Σ|N′(x_i)|`.
    pub pruned: usize,
    /// Undirected mutual edges in `A′`.
    pub mutual: usize,
    /// Points with no mutual edge.
    pub isolated: usize,
    pub components: usize,
}

/// Everything needed to reproduce and audit a run.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub version: String,
    pub config: RunConfig,
    pub dataset: String,
    pub n: usize,
    pub d: usize,
    pub clusters: usize,
    pub max_distance: f64,
    pub epsilons: Vec<f64>,
    pub thresholds: Vec<f64>,
    pub sigma: f64,
    pub edges: EdgeCounts,
    pub eigenvalues: Vec<f64>,
    pub timings: StageTimings,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ri: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ari: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nmi: Option<f64>,
}

impl RunReport {
    pub fn scores(&self) -> Option<Scores> {
        Some(Scores {
            ri: self.ri?,
            ari: self.ari?,
            nmi: self.nmi?,
        })
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub labels: ClusterLabels,
    pub report: RunReport,
    pub graph: NeighborGraph,
    pub betti: Vec<BettiSequence>,
    pub barcodes: Option<Vec<Barcode>>,
    pub scores: SimilarityTensor,
    pub thresholds: Thresholds,
    pub pruned: Vec<Vec<usize>>,
    pub adjacency: WeightedAdjacency,
    pub embedding: Embedding,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub keep_barcodes: bool,
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Runs all nine steps on `pc`. Noise in `cfg` is *not* applied here; see
/// [`load_input`].
pub fn run(pc: &PointCloud, cfg: &RunConfig) -> Result<PipelineOutput> {
    run_with(pc, cfg, RunOptions::default())
}

pub fn run_with(pc: &PointCloud, cfg: &RunConfig, opts: RunOptions) -> Result<PipelineOutput> {
    cfg.validate()?;
    let p = cfg
        .clusters
        .or_else(|| pc.num_classes())
        .ok_or_else(|| Error::Config("cluster count required when the input has no labels".into()))?;
    if p > pc.len() {
        return Err(Error::Config(format!("{p} clusters requested for {} points", pc.len())));
    }
    let mut timings = StageTimings::default();
    let start = Instant::now();

    let t = Instant::now();
    let graph = build_knn(pc, cfg.k)?;
    let grid = scale_grid(max_kth_distance(&graph), cfg.length)?;
    timings.knn_ms = ms(t);

    let t = Instant::now();
    let (betti, barcodes) = betti_sequences_with_barcodes(pc, &graph, &grid, cfg.max_dim, opts.keep_barcodes)?;
    timings.homology_ms = ms(t);

    let t = Instant::now();
    let scores = edge_similarities(&graph, &betti, cfg.similarity)?;
    let thresholds = whisker_thresholds(&scores)?;
    let pruned = prune_neighborhoods(&graph, &scores, &thresholds)?;
    timings.filter_ms = ms(t);

    let t = Instant::now();
    let sigma = data_sigma(pc)?;
    let adjacency = build_adjacency(pc, &pruned, sigma, cfg.kernel)?;
    let lap = laplacian(&adjacency)?;
    timings.graph_ms = ms(t);

    let t = Instant::now();
    let embedding = smallest_eigenvectors(&lap, p)?;
    timings.eigen_ms = ms(t);

    let t = Instant::now();
    let labels = kmeans(embedding.rows(), embedding.dim(), p, cfg.seed.derive(STREAM_KMEANS))?;
    timings.kmeans_ms = ms(t);
    timings.total_ms = ms(start);

    let metrics = pc.labels().map(|truth| evaluate(truth, &labels.labels)).transpose()?;
    let edges = EdgeCounts {
        knn: graph.num_edges(),
        pruned: pruned.iter().map(Vec::len).sum(),
        mutual: adjacency.num_edges(),
        isolated: (0..adjacency.len()).filter(|&i| adjacency.row(i).is_empty()).count(),
        components: connected_components(&lap).len(),
    };
    let report = RunReport {
        version: VERSION.to_owned(),
        config: cfg.clone(),
        dataset: pc.name.clone(),
        n: pc.len(),
        d: pc.dim(),
        clusters: p,
        max_distance: grid.max_distance,
        epsilons: grid.epsilons.clone(),
        thresholds: thresholds.alphas.clone(),
        sigma,
        edges,
        eigenvalues: embedding.eigenvalues.clone(),
        timings,
        ri: metrics.map(|m| m.ri),
        ari: metrics.map(|m| m.ari),
        nmi: metrics.map(|m| m.nmi),
    };
    Ok(PipelineOutput {
        labels,
        report,
        graph,
        betti,
        barcodes,
        scores,
        thresholds,
        pruned,
        adjacency,
        embedding,
    })
}

/// `point_index,label` rows.
pub fn write_labels_csv<W: Write>(mut w: W, labels: &[usize]) -> std::io::Result<()> {
    writeln!(w, "point_index,label")?;
    for (i, l) in labels.iter().enumerate() {
        writeln!(w, "{i},{l}")?;
    }
    w.flush()
}

/// Reads a label file: either `point_index,label` or any CSV with a `label`
/// column.
pub fn read_labels_csv(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    let path = path.as_ref();
    let pc_err = |e| Error::PointCloud(e);
    let mut rdr = csv::Reader::from_path(path).map_err(|e| {
        pc_err(crate::pointcloud::PointCloudError::Csv {
            row: 0,
            message: e.to_string(),
        })
    })?;
    let header = rdr
        .headers()
        .map_err(|e| {
            pc_err(crate::pointcloud::PointCloudError::Csv {
                row: 0,
                message: e.to_string(),
            })
        })?
        .clone();
    let col = header
        .iter()
        .position(|h| h == "label")
        .ok_or_else(|| pc_err(crate::pointcloud::PointCloudError::MissingLabelColumn("label".into())))?;
    let mut raw = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| {
            pc_err(crate::pointcloud::PointCloudError::Csv {
                row: r + 1,
                message: e.to_string(),
            })
        })?;
        raw.push(rec.get(col).unwrap_or_default().to_owned());
    }
    // numeric ids stay as given; anything else is mapped by first occurrence
    if let Ok(ids) = raw.iter().map(|s| s.parse::<usize>()).collect::<std::result::Result<Vec<_>, _>>() {
        return Ok(ids);
    }
    let mut map = std::collections::HashMap::new();
    Ok(raw
        .into_iter()
        .map(|s| {
            let next = map.len();
            *map.entry(s).or_insert(next)
        })
        .collect())
}

/// Runs `f` on a dedicated pool with `threads` workers (0 = rayon default).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

/// Grid of parameter values; every combination is one pipeline run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: RunConfig,
    pub ks: Vec<usize>,
    pub lengths: Vec<usize>,
    pub max_dims: Vec<usize>,
    pub noises: Vec<f64>,
    pub similarities: Vec<SimilarityKind>,
    pub kernels: Vec<KernelKind>,
}

impl SweepSpec {
    /// Sweep over the base configuration's own values only.
    pub fn single(base: RunConfig) -> Self {
        Self {
            ks: vec![base.k],
            lengths: vec![base.length],
            max_dims: vec![base.max_dim],
            noises: vec![base.noise],
            similarities: vec![base.similarity],
            kernels: vec![base.kernel],
            base,
        }
    }

    pub fn num_cells(&self) -> usize {
        self.ks.len()
            * self.lengths.len()
            * self.max_dims.len()
            * self.noises.len()
            * self.similarities.len()
            * self.kernels.len()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub dataset: String,
    pub k: usize,
    pub length: usize,
    pub max_dim: usize,
    pub noise: f64,
    pub similarity: SimilarityKind,
    pub kernel: KernelKind,
    pub ri: Option<f64>,
    pub ari: Option<f64>,
    pub nmi: Option<f64>,
    pub seconds: f64,
    pub error: Option<String>,
}

/// Runs every cell; failed cells carry their error and the sweep continues.
/// Input loading failures abort the sweep.
pub fn sweep(spec: &SweepSpec, mut on_row: impl FnMut(&SweepRow)) -> Result<Vec<SweepRow>> {
    if spec.num_cells() == 0 {
        return Err(Error::Config("sweep has an empty parameter range".into()));
    }
    let mut rows = Vec::with_capacity(spec.num_cells());
    for &noise in &spec.noises {
        let pc = load_input(&RunConfig {
            noise,
            ..spec.base.clone()
        })?;
        for &similarity in &spec.similarities {
            for &kernel in &spec.kernels {
                for &max_dim in &spec.max_dims {
                    for &length in &spec.lengths {
                        for &k in &spec.ks {
                            let cfg = RunConfig {
                                k,
                                length,
                                max_dim,
                                noise,
                                similarity,
                                kernel,
                                ..spec.base.clone()
                            };
                            let t = Instant::now();
                            let result = run(&pc, &cfg);
                            let seconds = t.elapsed().as_secs_f64();
                            let (scores, error) = match result {
                                Ok(out) => (out.report.scores(), None),
                                Err(e) => (None, Some(e.to_string())),
                            };
                            let row = SweepRow {
                                dataset: pc.name.clone(),
                                k,
                                length,
                                max_dim,
                                noise,
                                similarity,
                                kernel,
                                ri: scores.map(|s| s.ri),
                                ari: scores.map(|s| s.ari),
                                nmi: scores.map(|s| s.nmi),
                                seconds,
                                error,
                            };
                            on_row(&row);
                            rows.push(row);
                        }
                    }
                }
            }
        }
    }
    Ok(rows)
}

pub fn write_sweep_csv<W: Write>(w: W, rows: &[SweepRow]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record([
        "dataset", "k", "length", "max_dim", "noise", "similarity", "kernel", "ri", "ari", "nmi", "seconds",
        "error",
    ])?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        let sim = serde_json::to_value(r.similarity).ok();
        let ker = serde_json::to_value(r.kernel).ok();
        let name = |v: Option<serde_json::Value>| v.and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
        w.write_record([
            r.dataset.clone(),
            r.k.to_string(),
            r.length.to_string(),
            r.max_dim.to_string(),
            r.noise.to_string(),
            name(sim),
            name(ker),
            opt(r.ri),
            opt(r.ari),
            opt(r.nmi),
            format!("{:.3}", r.seconds),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()
}
