use std::collections::HashMap;

use serde::Serialize;

use super::filtration::Filtration;
use super::HomologyError;

/// Persistence interval; `death` is `f64::INFINITY` for essential classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub birth: f64,
    pub death: f64,
}

impl Interval {
    pub fn is_essential(&self) -> bool {
        self.death.is_infinite()
    }

    /// Half-open membership `birth <= eps < death`.
    pub fn contains(&self, eps: f64) -> bool {
        self.birth <= eps && eps < self.death
    }
}

/// Intervals per homology dimension `0..=max_hom_dim`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Barcode {
    dims: Vec<Vec<Interval>>,
}

impl Barcode {
    pub fn max_hom_dim(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn intervals(&self, m: usize) -> &[Interval] {
        &self.dims[m]
    }

    /// Intervals with positive length.
    pub fn nontrivial(&self, m: usize) -> impl Iterator<Item = &Interval> {
        self.dims[m].iter().filter(|iv| iv.birth < iv.death)
    }

    /// Number of `m`-dimensional classes alive at `eps`.
    pub fn betti_at_scale(&self, m: usize, eps: f64) -> Result<usize, HomologyError> {
        let dim = self.dims.get(m).ok_or(HomologyError::DimensionOutOfRange {
            m,
            max: self.max_hom_dim(),
        })?;
        Ok(dim.iter().filter(|iv| iv.contains(eps)).count())
    }
}

pub fn betti_at_scale(b: &Barcode, m: usize, eps: f64) -> Result<usize, HomologyError> {
    b.betti_at_scale(m, eps)
}

/// Column reduction schedule. Both produce identical pairings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reduction {
    /// Left-to-right reduction of every column.
    Standard,
    /// Dimension-descending reduction that zeroes the column of every pivot
    /// row found (clearing).
    #[default]
    Twist,
}

/// Barcode of `f` in dimensions `0..=max_hom_dim` over GF(2).
pub fn compute_barcode(f: &Filtration, max_hom_dim: usize) -> Result<Barcode, HomologyError> {
    compute_barcode_with(f, max_hom_dim, Reduction::default())
}

pub fn compute_barcode_with(
    f: &Filtration,
    max_hom_dim: usize,
    strategy: Reduction,
) -> Result<Barcode, HomologyError> {
    if f.max_dim() < max_hom_dim + 1 {
        return Err(HomologyError::InsufficientDimension {
            have: f.max_dim(),
            need: max_hom_dim + 1,
        });
    }
    let mut columns = boundary_columns(f)?;
    let n = columns.len();
    let dims: Vec<usize> = f.simplices().iter().map(|s| s.dim()).collect();

    // pivot_owner[row] = column whose reduced lowest entry is `row`
    let mut pivot_owner: Vec<Option<usize>> = vec![None; n];
    match strategy {
        Reduction::Standard => {
            for j in 0..n {
                reduce_column(j, &mut columns, &mut pivot_owner);
            }
        }
        Reduction::Twist => {
            let top = dims.iter().copied().max().unwrap_or(0);
            for d in (1..=top).rev() {
                for j in (0..n).filter(|&j| dims[j] == d) {
                    if pivot_owner[j].is_some() {
                        // birth simplex of a finite bar: its column reduces to zero
                        columns[j].clear();
                    } else {
                        reduce_column(j, &mut columns, &mut pivot_owner);
                    }
                }
            }
        }
    }

    let values: Vec<f64> = f.simplices().iter().map(|s| s.filtration_value).collect();
    let mut bars = vec![Vec::new(); max_hom_dim + 1];
    for i in 0..n {
        let d = dims[i];
        if d > max_hom_dim {
            continue;
        }
        match pivot_owner[i] {
            Some(j) => bars[d].push(Interval {
                birth: values[i],
                death: values[j],
            }),
            None if columns[i].is_empty() => bars[d].push(Interval {
                birth: values[i],
                death: f64::INFINITY,
            }),
            None => {}
        }
    }
    Ok(Barcode { dims: bars })
}

/// Boundary of every simplex as ascending filtration indices of its facets.
fn boundary_columns(f: &Filtration) -> Result<Vec<Vec<usize>>, HomologyError> {
    let index: HashMap<&[usize], usize> = f
        .simplices()
        .iter()
        .enumerate()
        .map(|(i, s)| (s.vertices(), i))
        .collect();
    if index.len() != f.len() {
        return Err(HomologyError::NotFaceClosed("duplicate simplex".into()));
    }
    let mut facet = Vec::new();
    f.simplices()
        .iter()
        .enumerate()
        .map(|(j, s)| {
            let v = s.vertices();
            if v.len() == 1 {
                return Ok(Vec::new());
            }
            let mut col = Vec::with_capacity(v.len());
            for skip in 0..v.len() {
                facet.clear();
                facet.extend(v.iter().enumerate().filter(|(p, _)| *p != skip).map(|(_, &x)| x));
                match index.get(facet.as_slice()) {
                    Some(&i) if i < j => col.push(i),
                    _ => {
                        return Err(HomologyError::NotFaceClosed(format!(
                            "facet {facet:?} of {v:?} missing or later in the order"
                        )))
                    }
                }
            }
            col.sort_unstable();
            Ok(col)
        })
        .collect()
}

fn reduce_column(j: usize, columns: &mut [Vec<usize>], pivot_owner: &mut [Option<usize>]) {
    let mut col = std::mem::take(&mut columns[j]);
    while let Some(&low) = col.last() {
        match pivot_owner[low] {
            Some(other) => xor_into(&mut col, &columns[other]),
            None => {
                pivot_owner[low] = Some(j);
                break;
            }
        }
    }
    columns[j] = col;
}

/// `target ^= other` for ascending index sets.
fn xor_into(target: &mut Vec<usize>, other: &[usize]) {
    let mut out = Vec::with_capacity(target.len() + other.len());
    let (mut a, mut b) = (0, 0);
    while a < target.len() && b < other.len() {
        match target[a].cmp(&other[b]) {
            std::cmp::Ordering::Less => {
                out.push(target[a]);
                a += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(other[b]);
                b += 1;
            }
            std::cmp::Ordering::Equal => {
                a += 1;
                b += 1;
            }
        }
    }
    out.extend_from_slice(&target[a..]);
    out.extend_from_slice(&other[b..]);
    *target = out;
}
