use crate::error::{Error, Result};
use crate::metric::{approx_eq, MetricSpace, Point};

use super::{check_pair, runs};

/// Largest DP table kept in memory for traceback.
pub const TRACEBACK_CELL_CAP: usize = 4_000_000;

/// A pair of equal-length expansions of two strings.
#[derive(Debug, Clone, PartialEq)]
pub struct Correspondence {
    pub xbar: Vec<Point>,
    pub ybar: Vec<Point>,
    pub cost: f64,
    /// Aligned index pairs `(i, j)`; empty when built by hand.
    pub path: Vec<(usize, usize)>,
}

impl Correspondence {
    pub fn len(&self) -> usize {
        self.xbar.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xbar.is_empty()
    }

    /// Checks that `xbar`/`ybar` expand `x`/`y`, have equal length and that
    /// `cost` is their summed letter distance.
    pub fn validate(&self, space: &MetricSpace, x: &[Point], y: &[Point]) -> Result<()> {
        if self.xbar.len() != self.ybar.len() {
            return Err(Error::InvariantViolation("expansions differ in length".into()));
        }
        if !is_expansion(&self.xbar, x) || !is_expansion(&self.ybar, y) {
            return Err(Error::InvariantViolation("not an expansion of the input".into()));
        }
        let cost: f64 = self.xbar.iter().zip(&self.ybar).map(|(&a, &b)| space.dist(a, b)).sum();
        if !approx_eq(cost, self.cost) {
            return Err(Error::InvariantViolation(format!(
                "recorded cost {} differs from actual cost {cost}",
                self.cost
            )));
        }
        Ok(())
    }

    /// True when no two consecutive steps of the alignment path advance x
    /// alone and then y alone (or the reverse).
    pub fn is_corner_free(&self) -> bool {
        self.path.windows(3).all(|w| !(w[2].0 == w[0].0 + 1 && w[2].1 == w[0].1 + 1))
    }
}

/// True when `long` is obtained from `short` by extending runs.
pub fn is_expansion(long: &[Point], short: &[Point]) -> bool {
    let (a, b) = (runs(long), runs(short));
    a.len() == b.len() && a.iter().zip(&b).all(|(p, q)| p.letter == q.letter && p.len >= q.len)
}

/// An optimal correspondence of minimum length.
///
/// The traceback prefers diagonal, then vertical (advance x only), then
/// horizontal moves. Afterwards every horizontal step adjacent to a vertical
/// one is merged into a single diagonal step, so no aligned position extends
/// both strings at once.
pub fn optimal_correspondence(space: &MetricSpace, x: &[Point], y: &[Point]) -> Result<Correspondence> {
    check_pair(Some(space), x, y)?;
    let (n1, n2) = (x.len(), y.len());
    if n1.saturating_mul(n2) > TRACEBACK_CELL_CAP {
        return Err(Error::SizeCap(format!(
            "traceback table of {n1}x{n2} cells exceeds {TRACEBACK_CELL_CAP}"
        )));
    }
    let at = |i: usize, j: usize| i * n2 + j;
    let mut table = vec![0.0f64; n1 * n2];
    for i in 0..n1 {
        for j in 0..n2 {
            let c = space.dist(x[i], y[j]);
            let prev = match (i, j) {
                (0, 0) => 0.0,
                (0, _) => table[at(0, j - 1)],
                (_, 0) => table[at(i - 1, 0)],
                _ => table[at(i - 1, j - 1)].min(table[at(i - 1, j)]).min(table[at(i, j - 1)]),
            };
            table[at(i, j)] = prev + c;
        }
    }

    let mut path = vec![(n1 - 1, n2 - 1)];
    let (mut i, mut j) = (n1 - 1, n2 - 1);
    while (i, j) != (0, 0) {
        let target = table[at(i, j)] - space.dist(x[i], y[j]);
        let candidates = [
            (i > 0 && j > 0).then(|| (i - 1, j - 1)),
            (i > 0).then(|| (i - 1, j)),
            (j > 0).then(|| (i, j - 1)),
        ];
        // Exact equality first; fall back to the smallest predecessor under rounding.
        let step = candidates
            .iter()
            .flatten()
            .find(|&&(a, b)| table[at(a, b)] == target)
            .or_else(|| {
                candidates.iter().flatten().min_by(|&&(a, b), &&(c, d)| {
                    table[at(a, b)].total_cmp(&table[at(c, d)])
                })
            })
            .copied()
            .expect("some predecessor exists away from the origin");
        (i, j) = step;
        path.push(step);
    }
    path.reverse();
    let path = shortcut_corners(path);

    let xbar: Vec<Point> = path.iter().map(|&(i, _)| x[i]).collect();
    let ybar: Vec<Point> = path.iter().map(|&(_, j)| y[j]).collect();
    let cost = xbar.iter().zip(&ybar).map(|(&a, &b)| space.dist(a, b)).sum();
    Ok(Correspondence { xbar, ybar, cost, path })
}

/// Drops the middle cell of every vertical/horizontal corner, which never
/// increases the cost since distances are non-negative.
fn shortcut_corners(path: Vec<(usize, usize)>) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::with_capacity(path.len());
    for cell in path {
        out.push(cell);
        while out.len() >= 3 {
            let k = out.len();
            let (a, c) = (out[k - 3], out[k - 1]);
            if c.0 == a.0 + 1 && c.1 == a.1 + 1 {
                out.remove(k - 2);
            } else {
                break;
            }
        }
    }
    out
}
