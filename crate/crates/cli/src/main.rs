//! `bftc`: generate benchmark clouds, cluster them, score labelings and run
//! parameter sweeps.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use bftc_core::homology::write_barcodes_jsonl;
use bftc_core::metrics::evaluate;
use bftc_core::pipeline::{
    load_input, read_labels_csv, run_with, sweep, with_threads, write_labels_csv, write_sweep_csv, RunOptions,
    SweepSpec,
};
use bftc_core::pointcloud::{add_gaussian_noise, gen_benchmark, Benchmark};
use bftc_core::{Error, KernelKind, RngSeed, RunConfig, SimilarityKind};

/// Worker threads for the parallel stages; unset or 0 means all cores.
const THREADS_ENV: &str = "BFTC_THREADS";

mod exit {
    pub const CONFIG: u8 = 3;
    pub const INPUT: u8 = 4;
    pub const DEGENERATE: u8 = 5;
    pub const PIPELINE: u8 = 6;
    pub const METRICS: u8 = 7;
    pub const OUTPUT: u8 = 8;
}

#[derive(Parser)]
#[command(name = "bftc", version, about = "Topological clustering via local Betti-number filtrations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a labeled synthetic benchmark cloud as CSV.
    Generate {
        /// linked_tori, torus_sphere_line or two_sphere_two_circle
        name: String,
        /// Standard deviation of isotropic Gaussian noise.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cluster a cloud and write labels.csv and report.json.
    Cluster {
        #[command(flatten)]
        params: Params,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write per-point barcodes (barcodes.jsonl).
        #[arg(long)]
        dump_barcodes: bool,
        /// Also write the edge similarity tensor (scores.csv).
        #[arg(long)]
        dump_scores: bool,
        /// Also write the spectral embedding (embedding.csv, eigenvalues.json).
        #[arg(long)]
        dump_embedding: bool,
    },
    /// Score predicted labels against ground truth; prints {ri, ari, nmi}.
    Evaluate {
        pred: PathBuf,
        truth: PathBuf,
    },
    /// Run the pipeline over a parameter grid and write one CSV row per cell.
    Sweep {
        #[command(flatten)]
        params: Params,
        /// k values, e.g. `1..14` or `5,10,15`.
        #[arg(long = "ks")]
        ks: Option<String>,
        #[arg(long = "lengths")]
        lengths: Option<String>,
        #[arg(long = "max-dims")]
        max_dims: Option<String>,
        /// Noise levels, e.g. `0.1,0.2,0.3`.
        #[arg(long = "noises")]
        noises: Option<String>,
        /// `cosine`, `l2` or both comma separated.
        #[arg(long = "similarities")]
        similarities: Option<String>,
        #[arg(long = "kernels")]
        kernels: Option<String>,
        /// Output CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Run parameters; any flag given overrides the JSON config file.
#[derive(Args)]
struct Params {
    /// JSON file with RunConfig fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Benchmark name or CSV path.
    #[arg(long)]
    input: Option<String>,
    /// Ground-truth column of a CSV input.
    #[arg(long)]
    label_column: Option<String>,
    #[arg(short, long)]
    k: Option<usize>,
    /// Filtration length.
    #[arg(short = 'L', long)]
    length: Option<usize>,
    /// Highest Betti dimension.
    #[arg(short = 'M', long)]
    max_dim: Option<usize>,
    /// Number of clusters; defaults to the number of ground-truth classes.
    #[arg(short = 'p', long)]
    clusters: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    similarity: Option<SimilarityKind>,
    #[arg(long)]
    kernel: Option<KernelKind>,
}

impl Params {
    fn resolve(&self) -> Result<RunConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_json_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.input {
            cfg.input = v.clone();
        }
        if let Some(v) = &self.label_column {
            cfg.label_column = Some(v.clone());
        }
        if let Some(v) = self.k {
            cfg.k = v;
        }
        if let Some(v) = self.length {
            cfg.length = v;
        }
        if let Some(v) = self.max_dim {
            cfg.max_dim = v;
        }
        if let Some(v) = self.clusters {
            cfg.clusters = Some(v);
        }
        if let Some(v) = self.seed {
            cfg.seed = RngSeed(v);
        }
        if let Some(v) = self.noise {
            cfg.noise = v;
        }
        if let Some(v) = self.similarity {
            cfg.similarity = v;
        }
        if let Some(v) = self.kernel {
            cfg.kernel = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// A failure paired with the process exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            e if e.is_degenerate() => exit::DEGENERATE,
            Error::Config(_) | Error::Json(_) => exit::CONFIG,
            Error::PointCloud(_) | Error::Io { .. } => exit::INPUT,
            Error::Metrics(_) => exit::METRICS,
            _ => exit::PIPELINE,
        };
        Failure {
            code,
            error: e.into(),
        }
    }
}

fn output_failure(e: anyhow::Error) -> Failure {
    Failure {
        code: exit::OUTPUT,
        error: e,
    }
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("cannot write {}", path.display()))?,
    ))
}

/// Runs `write` against `out`, or stdout when `out` is `None`.
fn emit(out: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), Failure> {
    let result = match out {
        Some(path) => create(path).and_then(|mut w| {
            write(&mut w).with_context(|| format!("cannot write {}", path.display()))?;
            w.flush()?;
            Ok(())
        }),
        None => write(&mut io::stdout().lock()).context("cannot write to stdout"),
    };
    result.map_err(output_failure)
}

fn generate(name: &str, noise: f64, seed: u64, out: Option<&Path>) -> Result<(), Failure> {
    let bench: Benchmark = name.parse().map_err(Error::from)?;
    // same seed streams as `cluster --input <name>`
    let seed = RngSeed(seed);
    let clean = gen_benchmark(bench, seed.derive(0)).map_err(Error::from)?;
    let pc = add_gaussian_noise(&clean, noise, seed.derive(1)).map_err(Error::from)?;
    emit(out, |w| pc.write_csv_to(w))
}

fn cluster(params: &Params, out: Option<PathBuf>, barcodes: bool, scores: bool, embedding: bool) -> Result<(), Failure> {
    let mut cfg = params.resolve()?;
    if out.is_some() {
        cfg.output = out;
    }
    let dir = cfg.output.clone().unwrap_or_else(|| PathBuf::from("bftc-out"));
    let pc = load_input(&cfg)?;
    let opts = RunOptions {
        keep_barcodes: barcodes,
    };
    let result = run_with(&pc, &cfg, opts)?;

    fs::create_dir_all(&dir)
        .with_context(|| format!("cannot create {}", dir.display()))
        .map_err(output_failure)?;
    emit(Some(&dir.join("labels.csv")), |w| write_labels_csv(w, &result.labels.labels))?;
    emit(Some(&dir.join("report.json")), |w| {
        serde_json::to_writer_pretty(&mut *w, &result.report)?;
        writeln!(w)
    })?;
    if let Some(b) = &result.barcodes {
        emit(Some(&dir.join("barcodes.jsonl")), |w| write_barcodes_jsonl(w, b))?;
    }
    if scores {
        emit(Some(&dir.join("scores.csv")), |w| result.scores.write_csv(w, &result.graph))?;
    }
    if embedding {
        emit(Some(&dir.join("embedding.csv")), |w| result.embedding.write_csv(w))?;
        emit(Some(&dir.join("eigenvalues.json")), |w| {
            serde_json::to_writer(&mut *w, &result.embedding.eigenvalues)?;
            writeln!(w)
        })?;
    }
    let r = &result.report;
    eprintln!(
        "{}: n={} clusters={} edges {} -> {} ({} mutual) in {:.0} ms",
        r.dataset, r.n, r.clusters, r.edges.knn, r.edges.pruned, r.edges.mutual, r.timings.total_ms
    );
    if let Some(s) = r.scores() {
        eprintln!("ri={:.4} ari={:.4} nmi={:.4}", s.ri, s.ari, s.nmi);
    }
    Ok(())
}

fn evaluate_files(pred: &Path, truth: &Path) -> Result<(), Failure> {
    let p = read_labels_csv(pred)?;
    let t = read_labels_csv(truth)?;
    let scores = evaluate(&t, &p).map_err(Error::from)?;
    emit(None, |w| {
        serde_json::to_writer(&mut *w, &scores)?;
        writeln!(w)
    })
}

/// Parses `a..b` (inclusive) or a comma-separated list.
fn parse_list<T: std::str::FromStr>(text: &str) -> anyhow::Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    let item = |s: &str| s.trim().parse::<T>().map_err(|e| anyhow::anyhow!("bad value {s:?}: {e}"));
    if let Some((a, b)) = text.split_once("..") {
        let (a, b): (usize, usize) = (a.trim().parse()?, b.trim().parse()?);
        if a > b {
            bail!("empty range {text:?}");
        }
        return (a..=b).map(|v| item(&v.to_string())).collect();
    }
    text.split(',').filter(|s| !s.trim().is_empty()).map(item).collect()
}

fn override_list<T: std::str::FromStr>(text: &Option<String>, slot: &mut Vec<T>) -> Result<(), Failure>
where
    T::Err: std::fmt::Display,
{
    if let Some(t) = text {
        *slot = parse_list(t).map_err(|error| Failure {
            code: exit::CONFIG,
            error,
        })?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_sweep(
    params: &Params,
    ks: &Option<String>,
    lengths: &Option<String>,
    max_dims: &Option<String>,
    noises: &Option<String>,
    similarities: &Option<String>,
    kernels: &Option<String>,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let mut spec = SweepSpec::single(params.resolve()?);
    override_list(ks, &mut spec.ks)?;
    override_list(lengths, &mut spec.lengths)?;
    override_list(max_dims, &mut spec.max_dims)?;
    override_list(noises, &mut spec.noises)?;
    override_list(similarities, &mut spec.similarities)?;
    override_list(kernels, &mut spec.kernels)?;
    let total = spec.num_cells();
    let mut done = 0;
    let rows = sweep(&spec, |row| {
        done += 1;
        let status = match (&row.error, row.ari) {
            (Some(e), _) => format!("error: {e}"),
            (None, Some(ari)) => format!("ari={ari:.4}"),
            (None, None) => "ok".into(),
        };
        eprintln!(
            "[{done}/{total}] k={} L={} M={} noise={} {:?}/{:?}: {status}",
            row.k, row.length, row.max_dim, row.noise, row.similarity, row.kernel
        );
    })?;
    emit(out, |w| write_sweep_csv(w, &rows))
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Generate {
            name,
            noise,
            seed,
            out,
        } => generate(&name, noise, seed, out.as_deref()),
        Command::Cluster {
            params,
            out,
            dump_barcodes,
            dump_scores,
            dump_embedding,
        } => cluster(&params, out, dump_barcodes, dump_scores, dump_embedding),
        Command::Evaluate { pred, truth } => evaluate_files(&pred, &truth),
        Command::Sweep {
            params,
            ks,
            lengths,
            max_dims,
            noises,
            similarities,
            kernels,
            out,
        } => run_sweep(&params, &ks, &lengths, &max_dims, &noises, &similarities, &kernels, out.as_deref()),
    }
}

fn threads_from_env() -> Result<usize, Failure> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| Failure {
            code: exit::CONFIG,
            error: anyhow::anyhow!("{THREADS_ENV} must be a nonnegative integer, got {v:?}"),
        }),
        Err(_) => Ok(0),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = threads_from_env().and_then(|threads| with_threads(threads, || dispatch(cli)));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
