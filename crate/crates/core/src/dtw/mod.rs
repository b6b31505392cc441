//! Sequences over a metric space and the exact distance oracles: DTW, DTW
//! under the 0/1 distance, Levenshtein distance, and an exhaustive DTW
//! enumerator used to cross-check the dynamic program.

mod correspondence;
mod runs;

pub use correspondence::{optimal_correspondence, Correspondence, TRACEBACK_CELL_CAP};
pub use runs::{
    collapse, collapse_light, heavy_hitter_list, is_run_free, reconstruct_light, runs,
    HeavyHitterList, Run,
};

use std::ops::{Add, Deref};

use crate::error::{Error, Result};
use crate::metric::{MetricSpace, Point};

/// Largest `|x| + |y|` accepted by [`dtw_brute`].
pub const BRUTE_FORCE_CAP: usize = 14;

/// A non-empty string of points, checked against a metric space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sequence(Vec<Point>);

impl Sequence {
    pub fn new(space: &MetricSpace, letters: Vec<Point>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::EmptySequence);
        }
        space.check_sequence(&letters)?;
        Ok(Sequence(letters))
    }

    pub fn letters(&self) -> &[Point] {
        &self.0
    }

    pub fn into_letters(self) -> Vec<Point> {
        self.0
    }
}

impl Deref for Sequence {
    type Target = [Point];
    fn deref(&self) -> &[Point] {
        &self.0
    }
}

fn check_pair(space: Option<&MetricSpace>, x: &[Point], y: &[Point]) -> Result<()> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySequence);
    }
    if let Some(space) = space {
        space.check_sequence(x)?;
        space.check_sequence(y)?;
    }
    Ok(())
}

/// Quadratic DTW recurrence with a single rolling row over the shorter side.
fn warp<T, F>(n1: usize, n2: usize, cost: F) -> T
where
    T: Copy + PartialOrd + Add<Output = T>,
    F: Fn(usize, usize) -> T,
{
    if n2 > n1 {
        warp_rows(n2, n1, |i, j| cost(j, i))
    } else {
        warp_rows(n1, n2, cost)
    }
}

fn warp_rows<T, F>(n1: usize, n2: usize, cost: F) -> T
where
    T: Copy + PartialOrd + Add<Output = T>,
    F: Fn(usize, usize) -> T,
{
    let min = |a: T, b: T| if b < a { b } else { a };
    let mut row: Vec<T> = Vec::with_capacity(n2);
    let mut acc = cost(0, 0);
    row.push(acc);
    for j in 1..n2 {
        acc = acc + cost(0, j);
        row.push(acc);
    }
    for i in 1..n1 {
        let mut diag = row[0];
        row[0] = row[0] + cost(i, 0);
        for j in 1..n2 {
            let up = row[j];
            let best = min(min(up, row[j - 1]), diag);
            diag = up;
            row[j] = best + cost(i, j);
        }
    }
    row[n2 - 1]
}

/// Exact DTW distance.
pub fn dtw(space: &MetricSpace, x: &[Point], y: &[Point]) -> Result<f64> {
    check_pair(Some(space), x, y)?;
    Ok(dtw_unchecked(space, x, y))
}

pub(crate) fn dtw_unchecked(space: &MetricSpace, x: &[Point], y: &[Point]) -> f64 {
    warp(x.len(), y.len(), |i, j| space.dist(x[i], y[j]))
}

/// DTW with the 0/1 distance on letters, independent of any metric.
pub fn dtw0(x: &[Point], y: &[Point]) -> Result<u64> {
    check_pair(None, x, y)?;
    Ok(warp(x.len(), y.len(), |i, j| u64::from(x[i] != y[j])))
}

/// Levenshtein distance with unit costs; empty strings are allowed.
pub fn edit_distance(x: &[Point], y: &[Point]) -> usize {
    let (x, y) = if x.len() < y.len() { (y, x) } else { (x, y) };
    let mut row: Vec<usize> = (0..=y.len()).collect();
    for (i, &a) in x.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, &b) in y.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = (diag + usize::from(a != b)).min(up + 1).min(row[j] + 1);
            diag = up;
        }
    }
    row[y.len()]
}

/// Minimum cost over all correspondences of length at most `max_len`
/// (default `|x| + |y|`), found by exhaustive enumeration.
///
/// Only correspondences that never duplicate an aligned pair are visited,
/// which loses nothing since costs are non-negative.
pub fn dtw_brute(space: &MetricSpace, x: &[Point], y: &[Point], max_len: Option<usize>) -> Result<f64> {
    check_pair(Some(space), x, y)?;
    if x.len() + y.len() > BRUTE_FORCE_CAP {
        return Err(Error::SizeCap(format!(
            "exhaustive DTW limited to |x|+|y| <= {BRUTE_FORCE_CAP}, got {}",
            x.len() + y.len()
        )));
    }
    let max_len = max_len.unwrap_or(x.len() + y.len());
    let mut best = f64::INFINITY;
    explore(space, x, y, 0, 0, 1, space.dist(x[0], y[0]), max_len, &mut best);
    if best.is_infinite() {
        return Err(Error::InvalidParameter(format!(
            "no correspondence fits in length {max_len}"
        )));
    }
    Ok(best)
}

#[allow(clippy::too_many_arguments)]
fn explore(
    space: &MetricSpace,
    x: &[Point],
    y: &[Point],
    i: usize,
    j: usize,
    len: usize,
    cost: f64,
    max_len: usize,
    best: &mut f64,
) {
    if len > max_len {
        return;
    }
    if i + 1 == x.len() && j + 1 == y.len() {
        if cost < *best {
            *best = cost;
        }
        return;
    }
    for (di, dj) in [(1, 1), (1, 0), (0, 1)] {
        let (ni, nj) = (i + di, j + dj);
        if ni < x.len() && nj < y.len() {
            let c = cost + space.dist(x[ni], y[nj]);
            explore(space, x, y, ni, nj, len + 1, c, max_len, best);
        }
    }
}
