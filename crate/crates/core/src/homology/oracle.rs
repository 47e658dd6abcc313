//! Brute-force Betti numbers, `nullity(∂_m) - rank(∂_{m+1})`, for tiny point
//! sets. Shares nothing with the filtration or reduction code; used to check it.

use super::HomologyError;

pub const ORACLE_MAX_POINTS: usize = 12;

/// Betti number `β_m` of the Vietoris–Rips complex at scale `eps`.
pub fn betti_bruteforce<P: AsRef<[f64]>>(
    points: &[P],
    eps: f64,
    m: usize,
) -> Result<usize, HomologyError> {
    let n = points.len();
    if n > ORACLE_MAX_POINTS {
        return Err(HomologyError::OracleTooLarge {
            n,
            max: ORACLE_MAX_POINTS,
        });
    }
    let close = |a: usize, b: usize| {
        let d2: f64 = points[a]
            .as_ref()
            .iter()
            .zip(points[b].as_ref())
            .map(|(x, y)| (x - y) * (x - y))
            .sum();
        d2.sqrt() <= eps
    };
    let simplices_of = |size: usize| -> Vec<u32> {
        (0u32..1 << n)
            .filter(|mask| mask.count_ones() as usize == size)
            .filter(|&mask| {
                let v: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
                v.iter()
                    .enumerate()
                    .all(|(a, &x)| v[a + 1..].iter().all(|&y| close(x, y)))
            })
            .collect()
    };
    let faces = simplices_of(m + 1);
    let cofaces = simplices_of(m + 2);
    let nullity = if m == 0 {
        faces.len()
    } else {
        faces.len() - gf2_rank(&boundary(&faces, &simplices_of(m)))
    };
    Ok(nullity - gf2_rank(&boundary(&cofaces, &faces)))
}

/// Dense boundary matrix: one row per column simplex, one entry per facet.
fn boundary(cols: &[u32], rows: &[u32]) -> Vec<Vec<bool>> {
    cols.iter()
        .map(|&c| {
            rows.iter()
                .map(|&r| r & c == r && (c & !r).count_ones() == 1)
                .collect()
        })
        .collect()
}

fn gf2_rank(matrix: &[Vec<bool>]) -> usize {
    let mut m: Vec<Vec<bool>> = matrix.to_vec();
    let width = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..width {
        let Some(p) = (rank..m.len()).find(|&r| m[r][c]) else {
            continue;
        };
        m.swap(rank, p);
        for r in 0..m.len() {
            if r != rank && m[r][c] {
                let pivot = m[rank].clone();
                m[r].iter_mut().zip(&pivot).for_each(|(x, y)| *x ^= *y);
            }
        }
        rank += 1;
    }
    rank
}
