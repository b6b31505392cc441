//! Random bounded-diameter partitions.
//!
//! | kind | construction | declared σ |
//! |---|---|---|
//! | integer line | shifted grid of side δ | 1 |
//! | ℓ_p grid | shifted axis-aligned grid | `d^(1−1/p)·δ/side` |
//! | matrix | CKR: radius in `[δ/4, δ/2]`, random center order | `4·H_|Σ|` |
//! | tree | cut edges heavier than δ/2 | 2 |
//! | Hamming | one part if δ ≥ 1, else singletons | 1 |
//!
//! Each part is represented by its smallest point id.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::dtw::Correspondence;
use crate::error::{Error, Result};
use crate::metric::{MetricKind, MetricSpace, Point};
use crate::randomness::SharedRandomness;

#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub delta: f64,
    part: Vec<u32>,
    rep: Vec<Point>,
}

impl Partition {
    fn from_keys<K: std::hash::Hash + Eq>(delta: f64, keys: impl Iterator<Item = K>) -> Self {
        let mut ids: HashMap<K, u32> = HashMap::new();
        let mut reps: Vec<Point> = Vec::new();
        let mut part = Vec::new();
        for (p, key) in keys.enumerate() {
            let next = ids.len() as u32;
            let id = *ids.entry(key).or_insert_with(|| {
                reps.push(p as Point);
                next
            });
            part.push(id);
        }
        let rep = part.iter().map(|&id| reps[id as usize]).collect();
        Partition { delta, part, rep }
    }

    pub fn num_parts(&self) -> usize {
        self.part.iter().copied().max().map_or(0, |m| m as usize + 1)
    }

    pub fn part_of(&self, p: Point) -> u32 {
        self.part[p as usize]
    }

    /// Smallest point id in the part of `p`.
    pub fn representative(&self, p: Point) -> Point {
        self.rep[p as usize]
    }

    pub fn separates(&self, a: Point, b: Point) -> bool {
        self.part_of(a) != self.part_of(b)
    }

    /// Replaces each letter by its part's representative.
    pub fn snap(&self, x: &[Point]) -> Vec<Point> {
        x.iter().map(|&l| self.representative(l)).collect()
    }

    /// Aligned pairs of the correspondence whose letters lie in different parts.
    pub fn cut_edges(&self, c: &Correspondence) -> usize {
        c.xbar.iter().zip(&c.ybar).filter(|&(&a, &b)| self.separates(a, b)).count()
    }

    /// Largest distance between two points of one part (exhaustive).
    pub fn max_part_diameter(&self, space: &MetricSpace) -> f64 {
        let mut groups: HashMap<u32, Vec<Point>> = HashMap::new();
        for p in space.points() {
            groups.entry(self.part_of(p)).or_default().push(p);
        }
        let mut worst = 0.0f64;
        for g in groups.values() {
            for &a in g {
                for &b in g {
                    worst = worst.max(space.dist(a, b));
                }
            }
        }
        worst
    }
}

fn harmonic(n: usize) -> f64 {
    (1..=n).map(|k| 1.0 / k as f64).sum()
}

/// Side of the grid cells used for a `dim`-dimensional ℓ_p grid and diameter bound `delta`.
fn grid_side(dim: u32, p: f64, delta: f64) -> f64 {
    let d = f64::from(dim);
    if p <= 2.0 {
        delta / d.powf(1.0 / p)
    } else {
        delta / (d.sqrt() * p.min(d.log2()).max(1.0).sqrt())
    }
}

/// The separation constant σ with `Pr[a, b separated] <= σ·d(a, b)/δ`.
pub fn declared_sigma(space: &MetricSpace) -> f64 {
    match space.kind() {
        MetricKind::IntegerLine | MetricKind::GeneralizedHamming => 1.0,
        MetricKind::LpGrid { dim, p } => {
            let d = f64::from(dim);
            d.powf(1.0 - 1.0 / p) * 1.0 / grid_side(dim, p, 1.0)
        }
        MetricKind::FiniteMatrix { .. } => 4.0 * harmonic(space.size()),
        MetricKind::Tree => 2.0,
    }
}

/// Samples a partition whose parts have diameter at most `delta`.
pub fn sample_partition(space: &MetricSpace, delta: f64, rand: &SharedRandomness) -> Result<Partition> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::InvalidParameter(format!("partition diameter must be positive, got {delta}")));
    }
    let mut rng = rand.rng();
    let n = space.size();
    Ok(match space.kind() {
        MetricKind::IntegerLine | MetricKind::LpGrid { .. } => {
            let (dim, p, extent) = space.grid_params().expect("grid-like space");
            let raw_delta = delta / space.scale();
            let side = if space.kind() == MetricKind::IntegerLine {
                raw_delta
            } else {
                grid_side(dim, p, raw_delta)
            };
            let shifts: Vec<f64> = (0..dim).map(|_| rng.random_range(0.0..side)).collect();
            Partition::from_keys(
                delta,
                (0..n as Point).map(|pt| {
                    let mut rest = pt;
                    shifts
                        .iter()
                        .map(|s| {
                            let c = f64::from(rest % extent);
                            rest /= extent;
                            ((c + s) / side).floor() as i64
                        })
                        .collect::<Vec<i64>>()
                }),
            )
        }
        MetricKind::GeneralizedHamming => {
            let whole = delta >= space.diameter();
            Partition::from_keys(delta, (0..n).map(|p| if whole { 0 } else { p }))
        }
        MetricKind::Tree => {
            let tree = space.tree_metric().expect("tree space");
            let limit = delta / 2.0;
            // Top of each node's light component: climb while the edge is light.
            Partition::from_keys(
                delta,
                (0..n as Point).map(|mut v| {
                    while let Some(p) = tree.parent(v) {
                        if tree.edge_weight(v) > limit {
                            break;
                        }
                        v = p;
                    }
                    v
                }),
            )
        }
        MetricKind::FiniteMatrix { metric } => {
            if !metric {
                return Err(Error::Precondition(
                    "CKR partitions need the triangle inequality".into(),
                ));
            }
            let radius = rng.random_range(delta / 4.0..=delta / 2.0);
            let mut order: Vec<Point> = space.points().collect();
            order.shuffle(&mut rng);
            Partition::from_keys(
                delta,
                (0..n as Point).map(|v| {
                    order
                        .iter()
                        .position(|&c| space.dist(c, v) <= radius)
                        .expect("a point is its own center")
                }),
            )
        }
    })
}
