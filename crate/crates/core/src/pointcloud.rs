//! Point clouds, synthetic benchmark shapes, CSV ingestion and noise.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PointCloudError {
    #[error("point cloud needs at least one point and one dimension (got n={n}, d={d})")]
    Empty { n: usize, d: usize },
    #[error("coordinate buffer has {len} values, expected {n}x{d}")]
    ShapeMismatch { len: usize, n: usize, d: usize },
    #[error("non-finite coordinate at point {point}, dimension {dim}")]
    NonFinite { point: usize, dim: usize },
    #[error("label vector has length {got}, expected {expected}")]
    LabelLength { got: usize, expected: usize },
    #[error("labels must cover 0..{classes} without gaps; class {missing} is absent")]
    LabelGap { classes: usize, missing: usize },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error at row {row}: {message}")]
    Csv { row: usize, message: String },
    #[error("no data rows")]
    NoRows,
    #[error("ragged rows: row {row} has {got} cells, header has {expected}")]
    Ragged { row: usize, got: usize, expected: usize },
    #[error("non-numeric cell at row {row}, column '{column}': {value:?}")]
    NonNumeric { row: usize, column: String, value: String },
    #[error("label column '{0}' not found in header")]
    MissingLabelColumn(String),
    #[error("no feature columns left after removing the label column")]
    NoFeatures,
    #[error("invalid shape parameters: {0}")]
    InvalidShape(String),
    #[error("unknown benchmark '{name}' (valid: {})", BENCHMARK_NAMES.join(", "))]
    UnknownBenchmark { name: String },
    #[error("noise standard deviation must be nonnegative, got {0}")]
    NegativeNoise(f64),
}

type Result<T> = std::result::Result<T, PointCloudError>;

/// Seed for every random draw in the crate. Equal seeds and parameters give
/// bitwise-equal output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

impl RngSeed {
    /// Independent child seed for a named sub-stream (splitmix64 finalizer).
    pub fn derive(self, stream: u64) -> RngSeed {
        let mut z = self
            .0
            .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(stream.wrapping_add(1)));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        RngSeed(z ^ (z >> 31))
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

impl From<u64> for RngSeed {
    fn from(v: u64) -> Self {
        RngSeed(v)
    }
}

/// `n` points in `d`-dimensional space, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    coords: Vec<f64>,
    n: usize,
    d: usize,
    labels: Option<Vec<usize>>,
    pub name: String,
}

impl PointCloud {
    pub fn new(coords: Vec<f64>, d: usize) -> Result<Self> {
        if d == 0 || coords.is_empty() {
            return Err(PointCloudError::Empty { n: 0, d });
        }
        if !coords.len().is_multiple_of(d) {
            return Err(PointCloudError::ShapeMismatch {
                len: coords.len(),
                n: coords.len() / d,
                d,
            });
        }
        if let Some(pos) = coords.iter().position(|v| !v.is_finite()) {
            return Err(PointCloudError::NonFinite {
                point: pos / d,
                dim: pos % d,
            });
        }
        let n = coords.len() / d;
        Ok(Self {
            coords,
            n,
            d,
            labels: None,
            name: String::new(),
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let d = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut coords = Vec::with_capacity(rows.len() * d);
        for r in rows {
            let r = r.as_ref();
            if r.len() != d {
                return Err(PointCloudError::ShapeMismatch {
                    len: r.len(),
                    n: rows.len(),
                    d,
                });
            }
            coords.extend_from_slice(r);
        }
        Self::new(coords, d)
    }

    pub fn with_labels(mut self, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(PointCloudError::LabelLength {
                got: labels.len(),
                expected: self.n,
            });
        }
        let classes = labels.iter().max().map_or(0, |m| m + 1);
        let mut seen = vec![false; classes];
        for &l in &labels {
            seen[l] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(PointCloudError::LabelGap { classes, missing });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.d)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn num_classes(&self) -> Option<usize> {
        self.labels
            .as_ref()
            .map(|l| l.iter().max().map_or(0, |m| m + 1))
    }

    /// Concatenates clouds of equal dimension, labelling each part by its
    /// position in `parts`.
    pub fn concat_labeled(parts: Vec<PointCloud>) -> Result<Self> {
        let d = parts.first().map(|p| p.d).unwrap_or(0);
        let mut coords = Vec::new();
        let mut labels = Vec::new();
        for (c, p) in parts.into_iter().enumerate() {
            if p.d != d {
                return Err(PointCloudError::InvalidShape(format!(
                    "cannot concatenate clouds of dimension {d} and {}",
                    p.d
                )));
            }
            labels.extend(std::iter::repeat_n(c, p.n));
            coords.extend(p.coords);
        }
        PointCloud::new(coords, d)?.with_labels(labels)
    }

    /// Writes the `f0..f{d-1}[,label]` CSV layout.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let io_err = |source| PointCloudError::Io {
            path: path.display().to_string(),
            source,
        };
        let file = std::fs::File::create(path).map_err(io_err)?;
        self.write_csv_to(file).map_err(io_err)
    }

    pub fn write_csv_to<W: std::io::Write>(&self, writer: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (0..self.d).map(|j| format!("f{j}")).collect();
        if self.labels.is_some() {
            header.push("label".into());
        }
        w.write_record(&header)?;
        let mut row: Vec<String> = Vec::with_capacity(self.d + 1);
        for i in 0..self.n {
            row.clear();
            row.extend(self.point(i).iter().map(|v| v.to_string()));
            if let Some(l) = &self.labels {
                row.push(l[i].to_string());
            }
            w.write_record(&row)?;
        }
        w.flush()
    }
}

/// Reads a headed, comma-separated file. Label strings are mapped to dense
/// ids in order of first occurrence.
pub fn load_csv(path: impl AsRef<Path>, label_column: Option<&str>) -> Result<PointCloud> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| PointCloudError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(read_csv(file, label_column)?.with_name(name))
}

pub fn read_csv<R: std::io::Read>(reader: R, label_column: Option<&str>) -> Result<PointCloud> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| PointCloudError::Csv {
            row: 0,
            message: e.to_string(),
        })?
        .iter()
        .map(str::to_owned)
        .collect();
    let label_idx = match label_column {
        Some(name) => Some(
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| PointCloudError::MissingLabelColumn(name.to_owned()))?,
        ),
        None => None,
    };
    let d = header.len() - usize::from(label_idx.is_some());
    if d == 0 {
        return Err(PointCloudError::NoFeatures);
    }

    let mut coords = Vec::new();
    let mut labels = Vec::new();
    let mut label_ids: HashMap<String, usize> = HashMap::new();
    for (r, rec) in rdr.records().enumerate() {
        // 1-based data row numbering; the header is row 0
        let row = r + 1;
        let rec = rec.map_err(|e| PointCloudError::Csv {
            row,
            message: e.to_string(),
        })?;
        if rec.len() != header.len() {
            return Err(PointCloudError::Ragged {
                row,
                got: rec.len(),
                expected: header.len(),
            });
        }
        for (c, cell) in rec.iter().enumerate() {
            if Some(c) == label_idx {
                let next = label_ids.len();
                labels.push(*label_ids.entry(cell.to_owned()).or_insert(next));
                continue;
            }
            let v: f64 = cell
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| PointCloudError::NonNumeric {
                    row,
                    column: header[c].clone(),
                    value: cell.to_owned(),
                })?;
            coords.push(v);
        }
    }
    if coords.is_empty() {
        return Err(PointCloudError::NoRows);
    }
    let pc = PointCloud::new(coords, d)?;
    match label_idx {
        Some(_) => pc.with_labels(labels),
        None => Ok(pc),
    }
}

/// Primitive shapes sampled by [`gen_shape`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    /// Torus with axis circle of radius `major` in the (x0, x1) plane and
    /// tube radius `minor`; uses the first three coordinates.
    Torus { major: f64, minor: f64 },
    /// Sphere in the full ambient dimension.
    Sphere { radius: f64 },
    /// Circle in the (x0, x1) plane.
    Circle { radius: f64 },
    /// Segment along x0, centred at the origin.
    Segment { length: f64 },
}

impl Shape {
    fn validate(&self, d: usize) -> Result<()> {
        let bad = |m: String| Err(PointCloudError::InvalidShape(m));
        match *self {
            Shape::Torus { major, minor } => {
                if !(minor > 0.0 && major > minor) {
                    return bad(format!("torus needs R > r > 0 (R={major}, r={minor})"));
                }
                if d < 3 {
                    return bad("torus needs at least 3 dimensions".into());
                }
            }
            Shape::Sphere { radius } | Shape::Circle { radius } if !(radius > 0.0) => {
                return bad(format!("radius must be positive, got {radius}"));
            }
            Shape::Circle { .. } if d < 2 => {
                return bad("circle needs at least 2 dimensions".into());
            }
            Shape::Segment { length } if !(length > 0.0) => {
                return bad(format!("segment length must be positive, got {length}"));
            }
            _ => {}
        }
        Ok(())
    }

    /// Distance from `p` (in the shape's canonical frame) to the ideal shape.
    pub fn residual(&self, p: &[f64]) -> f64 {
        match *self {
            Shape::Torus { major, minor } => {
                let ring = p[0].hypot(p[1]) - major;
                let rest: f64 = p[3..].iter().map(|v| v * v).sum();
                ((ring * ring + p[2] * p[2] + rest).sqrt() - minor).abs()
            }
            Shape::Sphere { radius } => (norm(p) - radius).abs(),
            Shape::Circle { radius } => {
                let ring = p[0].hypot(p[1]) - radius;
                let rest: f64 = p[2..].iter().map(|v| v * v).sum();
                (ring * ring + rest).sqrt()
            }
            Shape::Segment { length } => {
                let along = (p[0].abs() - length / 2.0).max(0.0);
                let rest: f64 = p[1..].iter().map(|v| v * v).sum();
                (along * along + rest).sqrt()
            }
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        out.fill(0.0);
        match *self {
            Shape::Torus { major, minor } => {
                let theta = rng.random_range(0.0..TAU);
                let phi = rng.random_range(0.0..TAU);
                let ring = major + minor * phi.cos();
                out[0] = ring * theta.cos();
                out[1] = ring * theta.sin();
                out[2] = minor * phi.sin();
            }
            Shape::Sphere { radius } => loop {
                for v in out.iter_mut() {
                    *v = StandardNormal.sample(rng);
                }
                let r = norm(out);
                if r > 1e-12 {
                    out.iter_mut().for_each(|v| *v *= radius / r);
                    break;
                }
            },
            Shape::Circle { radius } => {
                let theta = rng.random_range(0.0..TAU);
                out[0] = radius * theta.cos();
                out[1] = radius * theta.sin();
            }
            Shape::Segment { length } => {
                out[0] = rng.random_range(-length / 2.0..length / 2.0);
            }
        }
    }
}

/// Rigid orientation applied to canonical shape samples before translation.
#[derive(Debug, Clone, PartialEq)]
pub enum Orientation {
    Identity,
    /// Orthogonal `d x d` matrix; points map as `x -> Q x`.
    Rotation(DMatrix<f64>),
}

impl Orientation {
    /// Rotation by `angle` radians in the plane of axes `a` and `b`
    /// (taking `e_a` towards `e_b`).
    pub fn plane(d: usize, a: usize, b: usize, angle: f64) -> Self {
        let mut q = DMatrix::identity(d, d);
        let (s, c) = angle.sin_cos();
        q[(a, a)] = c;
        q[(b, b)] = c;
        q[(a, b)] = -s;
        q[(b, a)] = s;
        Orientation::Rotation(q)
    }

    pub fn then(self, other: Orientation) -> Orientation {
        match (self, other) {
            (Orientation::Identity, o) | (o, Orientation::Identity) => o,
            (Orientation::Rotation(a), Orientation::Rotation(b)) => Orientation::Rotation(b * a),
        }
    }

    fn apply(&self, p: &mut [f64]) {
        if let Orientation::Rotation(q) = self {
            let src = p.to_vec();
            for (r, out) in p.iter_mut().enumerate() {
                *out = (0..src.len()).map(|c| q[(r, c)] * src[c]).sum();
            }
        }
    }

    /// Inverse map, used to check membership residuals.
    pub fn unapply(&self, p: &[f64]) -> Vec<f64> {
        match self {
            Orientation::Identity => p.to_vec(),
            Orientation::Rotation(q) => (0..p.len())
                .map(|c| (0..p.len()).map(|r| q[(r, c)] * p[r]).sum())
                .collect(),
        }
    }

    fn validate(&self, d: usize) -> Result<()> {
        if let Orientation::Rotation(q) = self {
            if q.nrows() != d || q.ncols() != d {
                return Err(PointCloudError::InvalidShape(format!(
                    "orientation is {}x{}, expected {d}x{d}",
                    q.nrows(),
                    q.ncols()
                )));
            }
            let err = (q.transpose() * q - DMatrix::<f64>::identity(d, d)).amax();
            if err > 1e-9 {
                return Err(PointCloudError::InvalidShape(
                    "orientation matrix is not orthogonal".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Samples `n` points on `shape`, uniformly in its angular (or linear)
/// parameters, then orients and translates them.
pub fn gen_shape(
    shape: Shape,
    n: usize,
    center: &[f64],
    orientation: &Orientation,
    seed: RngSeed,
) -> Result<PointCloud> {
    let d = center.len();
    if n == 0 || d == 0 {
        return Err(PointCloudError::Empty { n, d });
    }
    shape.validate(d)?;
    orientation.validate(d)?;
    let mut rng = seed.rng();
    let mut coords = vec![0.0; n * d];
    for p in coords.chunks_exact_mut(d) {
        shape.sample(&mut rng, p);
        orientation.apply(p);
        p.iter_mut().zip(center).for_each(|(v, c)| *v += c);
    }
    PointCloud::new(coords, d)
}

pub const BENCHMARK_NAMES: [&str; 3] = ["linked_tori", "torus_sphere_line", "two_sphere_two_circle"];

/// Synthetic 3-D benchmark sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Benchmark {
    /// Two interlocked tori, 2000 points each.
    LinkedTori,
    /// Torus (2000), sphere (1000) and a segment through the torus hole (300).
    TorusSphereLine,
    /// Two spheres (1000 each), each ringed by a circle (500 each).
    TwoSphereTwoCircle,
}

impl Benchmark {
    pub fn name(self) -> &'static str {
        match self {
            Benchmark::LinkedTori => BENCHMARK_NAMES[0],
            Benchmark::TorusSphereLine => BENCHMARK_NAMES[1],
            Benchmark::TwoSphereTwoCircle => BENCHMARK_NAMES[2],
        }
    }

    pub fn num_classes(self) -> usize {
        match self {
            Benchmark::LinkedTori => 2,
            Benchmark::TorusSphereLine => 3,
            Benchmark::TwoSphereTwoCircle => 4,
        }
    }
}

impl FromStr for Benchmark {
    type Err = PointCloudError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linked_tori" => Ok(Benchmark::LinkedTori),
            "torus_sphere_line" => Ok(Benchmark::TorusSphereLine),
            "two_sphere_two_circle" => Ok(Benchmark::TwoSphereTwoCircle),
            _ => Err(PointCloudError::UnknownBenchmark { name: s.to_owned() }),
        }
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub const TORUS_MAJOR: f64 = 2.0;
pub const TORUS_MINOR: f64 = 0.5;

/// One component of a benchmark layout.
#[derive(Debug, Clone)]
pub struct Component {
    pub shape: Shape,
    pub n: usize,
    pub center: [f64; 3],
    pub orientation: Orientation,
}

/// Component geometry of each benchmark, in label order.
///
/// * linked tori: torus 0 at the origin in the xy-plane; torus 1 rotated a
///   quarter turn about x and shifted by `(R, 0, 0)`. Axis circles stay 2 apart.
/// * torus/sphere/line: torus at the origin, unit sphere at `(5.5, 0, 0)`,
///   segment of length 6 along z through the torus hole.
/// * two spheres/two circles: unit spheres at `(±3, 0, 0)`, each ringed by a
///   radius-2 circle in its equatorial plane.
pub fn benchmark_layout(b: Benchmark) -> Vec<Component> {
    let torus = Shape::Torus {
        major: TORUS_MAJOR,
        minor: TORUS_MINOR,
    };
    let comp = |shape, n, center, orientation| Component {
        shape,
        n,
        center,
        orientation,
    };
    match b {
        Benchmark::LinkedTori => vec![
            comp(torus, 2000, [0.0; 3], Orientation::Identity),
            comp(
                torus,
                2000,
                [TORUS_MAJOR, 0.0, 0.0],
                Orientation::plane(3, 1, 2, std::f64::consts::FRAC_PI_2),
            ),
        ],
        Benchmark::TorusSphereLine => vec![
            comp(torus, 2000, [0.0; 3], Orientation::Identity),
            comp(Shape::Sphere { radius: 1.0 }, 1000, [5.5, 0.0, 0.0], Orientation::Identity),
            comp(
                Shape::Segment { length: 6.0 },
                300,
                [0.0; 3],
                Orientation::plane(3, 0, 2, std::f64::consts::FRAC_PI_2),
            ),
        ],
        Benchmark::TwoSphereTwoCircle => vec![
            comp(Shape::Sphere { radius: 1.0 }, 1000, [-3.0, 0.0, 0.0], Orientation::Identity),
            comp(Shape::Sphere { radius: 1.0 }, 1000, [3.0, 0.0, 0.0], Orientation::Identity),
            comp(Shape::Circle { radius: 2.0 }, 500, [-3.0, 0.0, 0.0], Orientation::Identity),
            comp(Shape::Circle { radius: 2.0 }, 500, [3.0, 0.0, 0.0], Orientation::Identity),
        ],
    }
}

pub fn gen_benchmark(b: Benchmark, seed: RngSeed) -> Result<PointCloud> {
    let parts = benchmark_layout(b)
        .into_iter()
        .enumerate()
        .map(|(c, comp)| {
            gen_shape(comp.shape, comp.n, &comp.center, &comp.orientation, seed.derive(c as u64))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PointCloud::concat_labeled(parts)?.with_name(b.name()))
}

/// Adds i.i.d. `Normal(0, rho^2)` noise to every coordinate.
pub fn add_gaussian_noise(pc: &PointCloud, rho: f64, seed: RngSeed) -> Result<PointCloud> {
    if !(rho >= 0.0) {
        return Err(PointCloudError::NegativeNoise(rho));
    }
    let mut out = pc.clone();
    if rho == 0.0 {
        return Ok(out);
    }
    let normal = Normal::new(0.0, rho).map_err(|_| PointCloudError::NegativeNoise(rho))?;
    let mut rng = seed.rng();
    for v in out.coords.iter_mut() {
        *v += normal.sample(&mut rng);
    }
    Ok(out)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
