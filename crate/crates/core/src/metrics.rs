//! Rand index, adjusted Rand index and normalized mutual information.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("label vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least two points, got {0}")]
    TooFewPoints(usize),
}

/// Counts `n_ij` of points with true class `i` and predicted class `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    counts: Vec<Vec<u64>>,
    rows: Vec<u64>,
    cols: Vec<u64>,
    total: u64,
}

impl ContingencyTable {
    pub fn new(truth: &[usize], pred: &[usize]) -> Result<Self, MetricsError> {
        if truth.len() != pred.len() {
            return Err(MetricsError::LengthMismatch(truth.len(), pred.len()));
        }
        if truth.len() < 2 {
            return Err(MetricsError::TooFewPoints(truth.len()));
        }
        let t = dense_ids(truth);
        let p = dense_ids(pred);
        let r = t.iter().max().map_or(0, |m| m + 1);
        let c = p.iter().max().map_or(0, |m| m + 1);
        let mut counts = vec![vec![0u64; c]; r];
        for (&a, &b) in t.iter().zip(&p) {
            counts[a][b] += 1;
        }
        let rows = counts.iter().map(|row| row.iter().sum()).collect();
        let cols = (0..c).map(|j| counts.iter().map(|row| row[j]).sum()).collect();
        Ok(Self {
            counts,
            rows,
            cols,
            total: truth.len() as u64,
        })
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn row_sums(&self) -> &[u64] {
        &self.rows
    }

    pub fn col_sums(&self) -> &[u64] {
        &self.cols
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    fn pair_sums(&self) -> (f64, f64, f64, f64) {
        let within: f64 = self.counts.iter().flatten().map(|&x| comb2(x)).sum();
        let a: f64 = self.rows.iter().map(|&x| comb2(x)).sum();
        let b: f64 = self.cols.iter().map(|&x| comb2(x)).sum();
        (within, a, b, comb2(self.total))
    }
}

/// Relabels arbitrary ids to `0..c` by first occurrence.
fn dense_ids(labels: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect()
}

fn comb2(x: u64) -> f64 {
    (x as f64) * (x as f64 - 1.0) / 2.0
}

pub fn rand_index(truth: &[usize], pred: &[usize]) -> Result<f64, MetricsError> {
    let (within, a, b, total) = ContingencyTable::new(truth, pred)?.pair_sums();
    // agreeing pairs: together in both, plus apart in both
    Ok((total + 2.0 * within - a - b) / total)
}

pub fn adjusted_rand_index(truth: &[usize], pred: &[usize]) -> Result<f64, MetricsError> {
    let (within, a, b, total) = ContingencyTable::new(truth, pred)?.pair_sums();
    // scaled by `total` so both terms are exact for moderate n
    let num = within * total - a * b;
    let den = 0.5 * (a + b) * total - a * b;
    if den == 0.0 {
        return Ok(1.0);
    }
    Ok(num / den)
}

/// Mutual information normalized by the geometric mean of the entropies.
pub fn nmi(truth: &[usize], pred: &[usize]) -> Result<f64, MetricsError> {
    let t = ContingencyTable::new(truth, pred)?;
    let n = t.total as f64;
    let entropy = |m: &[u64]| -> f64 {
        m.iter()
            .filter(|&&x| x > 0)
            .map(|&x| {
                let p = x as f64 / n;
                -p * p.ln()
            })
            .sum()
    };
    let ht = entropy(&t.rows);
    let hp = entropy(&t.cols);
    if ht == 0.0 && hp == 0.0 {
        return Ok(1.0);
    }
    if ht == 0.0 || hp == 0.0 {
        return Ok(0.0);
    }
    let mut mi = 0.0;
    for (i, row) in t.counts.iter().enumerate() {
        for (j, &nij) in row.iter().enumerate() {
            if nij > 0 {
                let nij = nij as f64;
                mi += nij / n * (n * nij / (t.rows[i] as f64 * t.cols[j] as f64)).ln();
            }
        }
    }
    Ok((mi.max(0.0) / (ht * hp).sqrt()).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scores {
    pub ri: f64,
    pub ari: f64,
    pub nmi: f64,
}

pub fn evaluate(truth: &[usize], pred: &[usize]) -> Result<Scores, MetricsError> {
    Ok(Scores {
        ri: rand_index(truth, pred)?,
        ari: adjusted_rand_index(truth, pred)?,
        nmi: nmi(truth, pred)?,
    })
}
