//! Probabilistic embedding of a finite metric into a 2-HST.
//!
//! Points are carved into nested clusters: level-`i` clusters assign each
//! point to the first center (in a random order) within `β·2^(i−1)`, with `β`
//! uniform in `[1, 2)`. A cluster that is not split at the next level is not
//! given a node of its own. The edge from a level-`i` cluster to its parent
//! weighs `2^(i+2)`, which exceeds the diameter of the parent cluster, so the
//! heaviest-edge tree distance never contracts.

use rand::seq::SliceRandom;
use rand::Rng;

use super::tree::TreeMetric;
use crate::error::{Error, Result};
use crate::metric::{MetricSpace, Point};
use crate::randomness::SharedRandomness;

/// Documented bound on `max_{a,b} E[d_T(φa, φb)] / (d(a, b)·log₂|Σ|)`.
pub const C_FRT: f64 = 8.0;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingResult {
    pub tree: TreeMetric,
    /// Leaf of the tree holding each source point.
    pub phi: Vec<Point>,
    pub seed_id: u64,
}

impl EmbeddingResult {
    pub fn map(&self, x: &[Point]) -> Vec<Point> {
        x.iter().map(|&l| self.phi[l as usize]).collect()
    }

    pub fn tree_space(&self) -> MetricSpace {
        MetricSpace::tree(self.tree.clone())
    }

    /// Tree distance between the images of two source points.
    pub fn embedded_distance(&self, a: Point, b: Point) -> f64 {
        self.tree.distance_unchecked(self.phi[a as usize], self.phi[b as usize])
    }
}

pub fn frt_embed(space: &MetricSpace, rand: &SharedRandomness) -> Result<EmbeddingResult> {
    let n = space.size();
    if n >= 2 && !space.is_normalized() {
        return Err(Error::Precondition(format!(
            "embedding needs minimum distance 1, got {}",
            space.min_dist()
        )));
    }
    let mut rng = rand.rng();
    let mut order: Vec<Point> = space.points().collect();
    order.shuffle(&mut rng);
    let beta: f64 = rng.random_range(1.0..2.0);

    let mut parent: Vec<Option<Point>> = vec![None];
    let mut weight = vec![0.0];
    let mut phi = vec![0; n];
    if n == 1 {
        return Ok(EmbeddingResult {
            tree: TreeMetric::new(parent, weight)?,
            phi,
            seed_id: rand.id(),
        });
    }

    let mut top: i32 = 1;
    while 2f64.powi(top - 1) < space.diameter() {
        top += 1;
    }
    // (node, level, members)
    let mut stack: Vec<(Point, i32, Vec<Point>)> = vec![(0, top, space.points().collect())];
    while let Some((node, level, members)) = stack.pop() {
        let mut level = level;
        let parts = loop {
            level -= 1;
            let radius = beta * 2f64.powi(level - 1);
            let parts = carve(space, &order, &members, radius);
            if parts.len() > 1 {
                break parts;
            }
        };
        for part in parts {
            let child = parent.len() as Point;
            parent.push(Some(node));
            weight.push(2f64.powi(level + 2));
            if part.len() == 1 {
                phi[part[0] as usize] = child;
            } else {
                stack.push((child, level, part));
            }
        }
    }
    Ok(EmbeddingResult { tree: TreeMetric::new(parent, weight)?, phi, seed_id: rand.id() })
}

/// Splits `members` by the first center in `order` within `radius`.
fn carve(space: &MetricSpace, order: &[Point], members: &[Point], radius: f64) -> Vec<Vec<Point>> {
    let mut parts: Vec<(Point, Vec<Point>)> = Vec::new();
    let mut rank = vec![usize::MAX; space.size()];
    for (r, &c) in order.iter().enumerate() {
        rank[c as usize] = r;
    }
    for &v in members {
        let center = order
            .iter()
            .copied()
            .find(|&c| space.dist(c, v) <= radius)
            .expect("every point is within any positive radius of itself");
        match parts.iter_mut().find(|(c, _)| *c == center) {
            Some((_, p)) => p.push(v),
            None => parts.push((center, vec![v])),
        }
    }
    parts.sort_by_key(|(c, _)| rank[*c as usize]);
    parts.into_iter().map(|(_, p)| p).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(n: usize) -> MetricSpace {
        let mut d = vec![1.0; n * n];
        for i in 0..n {
            d[i * n + i] = 0.0;
        }
        MetricSpace::matrix(n, d, true).unwrap()
    }

    #[test]
    fn single_point() {
        let e = frt_embed(&uniform(1), &SharedRandomness::new(0)).unwrap();
        assert_eq!(e.tree.len(), 1);
        assert_eq!(e.phi, vec![0]);
    }

    #[test]
    fn two_points_not_contracted() {
        let e = frt_embed(&uniform(2), &SharedRandomness::new(0)).unwrap();
        assert!(e.embedded_distance(0, 1) >= 1.0);
    }

    #[test]
    fn rejects_unnormalized() {
        let s = MetricSpace::from_lower_triangle(&[vec![0.0], vec![2.0, 0.0]], true).unwrap();
        assert!(matches!(frt_embed(&s, &SharedRandomness::new(0)), Err(Error::Precondition(_))));
    }

    #[test]
    fn structure_on_line() {
        let line = MetricSpace::integer_line(40).unwrap();
        for seed in 0..20 {
            let e = frt_embed(&line, &SharedRandomness::new(seed)).unwrap();
            assert!(e.tree.is_two_hst());
            let mut leaves = e.phi.clone();
            leaves.sort();
            leaves.dedup();
            assert_eq!(leaves.len(), 40);
            for a in 0..40 {
                for b in 0..40 {
                    assert!(e.embedded_distance(a, b) >= line.dist(a, b));
                }
            }
        }
    }
}
