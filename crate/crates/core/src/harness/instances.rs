//! Random spaces and sequence pairs.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use crate::decompositions::TreeMetric;
use crate::error::{Error, Result};
use crate::gadgets::{self, Family, GadgetInstance};
use crate::metric::{MetricSpace, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Distribution {
    /// Independent random strings with random run lengths.
    Random,
    /// `y` is `x` with `k` run shifts and `k` substitutions.
    PlantedNear { k: usize },
    /// `y` replaces each letter of `x` by a far-away letter.
    PlantedFar,
    Identical,
    /// A random member of a gadget family sized for `n` and `α`; the gadget
    /// brings its own space.
    Gadget(Family),
}

impl std::str::FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("unknown distribution '{s}'"));
        Ok(match s {
            "random" => Distribution::Random,
            "planted-far" | "far" => Distribution::PlantedFar,
            "identical" => Distribution::Identical,
            _ if s.starts_with("gadget:") => Distribution::Gadget(s["gadget:".len()..].parse()?),
            _ => {
                let k = s
                    .strip_prefix("planted-near:")
                    .or_else(|| s.strip_prefix("near:"))
                    .ok_or_else(bad)?;
                Distribution::PlantedNear { k: k.parse().map_err(|_| bad())? }
            }
        })
    }
}

impl std::fmt::Display for Distribution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Distribution::Random => write!(f, "random"),
            Distribution::PlantedNear { k } => write!(f, "planted-near:{k}"),
            Distribution::PlantedFar => write!(f, "planted-far"),
            Distribution::Identical => write!(f, "identical"),
            Distribution::Gadget(g) => write!(f, "gadget:{}", g.name()),
        }
    }
}

/// Length-`n` string of runs with lengths uniform in `1..=max_run`.
pub fn random_runs(rng: &mut impl Rng, n: usize, size: u32, max_run: usize) -> Vec<Point> {
    let mut x = Vec::with_capacity(n);
    while x.len() < n {
        let letter = rng.random_range(0..size);
        let len = rng.random_range(1..=max_run.max(1)).min(n - x.len());
        x.extend(std::iter::repeat_n(letter, len));
    }
    x
}

/// `x` with `k` run shifts (a letter overwritten by its left neighbour)
/// and `k` substitutions by a uniformly random letter. Length is preserved
/// and `dtw0(x, y) <= 2k`.
pub fn planted_near(rng: &mut impl Rng, x: &[Point], k: usize, size: u32) -> Vec<Point> {
    let mut y = x.to_vec();
    let n = y.len();
    for _ in 0..k {
        if n >= 2 {
            let p = rng.random_range(1..n);
            y[p] = y[p - 1];
        }
    }
    for _ in 0..k {
        let p = rng.random_range(0..n);
        y[p] = rng.random_range(0..size);
    }
    y
}

/// For every point, the points at maximum distance from it.
fn far_table(space: &MetricSpace) -> Vec<Vec<Point>> {
    space
        .points()
        .map(|a| {
            let best = space.points().map(|b| space.dist(a, b)).fold(0.0, f64::max);
            space.points().filter(|&b| space.dist(a, b) >= best * (1.0 - 1e-9)).collect()
        })
        .collect()
}

pub fn planted_far(rng: &mut impl Rng, space: &MetricSpace, x: &[Point]) -> Vec<Point> {
    let far = far_table(space);
    x.iter().map(|&a| *far[a as usize].choose(rng).unwrap()).collect()
}

/// A random gadget of `family` whose strings have length about `n`.
pub fn gadget_instance(rng: &mut impl Rng, family: Family, n: usize, alpha: usize) -> Result<GadgetInstance> {
    let alpha = alpha.max(2);
    let bits = |rng: &mut dyn rand::RngCore, t: usize| (0..t).map(|_| rng.random_bool(0.5)).collect::<Vec<_>>();
    match family {
        Family::Index => {
            let t = (n / (3 * alpha)).max(1);
            let i = rng.random_range(1..=t);
            gadgets::gen_index_gadget(&bits(rng, t), i, alpha)
        }
        Family::Int => {
            let m = alpha.min(4) as Point;
            let k = (n / (m as usize + 3 * alpha)).max(1);
            let xvec: Vec<Point> = (0..k).map(|_| rng.random_range(1..m)).collect();
            let i = rng.random_range(1..=k);
            let yi = rng.random_range(1..m);
            gadgets::gen_int_gadget(&xvec, i, yi, alpha, m)
        }
        Family::Set => {
            let n = (n / alpha).max(1) * alpha;
            let universe = 2 * (n / alpha) as u32 + 1;
            let mut pool: Vec<Point> = (0..universe).collect();
            let (set, _) = pool.partial_shuffle(rng, n / alpha);
            let a = rng.random_range(0..universe);
            gadgets::gen_set_gadget(set, a, alpha, n)
        }
        Family::Linear => {
            let t = (n / 4).max(1);
            let i = rng.random_range(1..=t);
            gadgets::gen_linear_gadget(&bits(rng, t), i)
        }
    }
}

/// A pair drawn from `dist`; runs of `x` are at most `max_run` long.
///
/// Gadget distributions are not handled here; see [`gadget_instance`].
pub fn generate(
    rng: &mut impl Rng,
    space: &MetricSpace,
    dist: Distribution,
    n: usize,
    max_run: usize,
) -> (Vec<Point>, Vec<Point>) {
    let size = space.size() as u32;
    let x = random_runs(rng, n, size, max_run);
    let y = match dist {
        Distribution::Random => random_runs(rng, n, size, max_run),
        Distribution::PlantedNear { k } => planted_near(rng, &x, k, size),
        Distribution::PlantedFar => planted_far(rng, space, &x),
        Distribution::Identical | Distribution::Gadget(_) => x.clone(),
    };
    (x, y)
}

/// Random tree whose edge weights do not increase away from the root.
///
/// Children of the root weigh `2^top`; every other edge weighs its parent
/// edge times a factor in `[1/4, 1]`, or exactly half when `two_hst` is set.
pub fn random_tree(rng: &mut impl Rng, nodes: usize, top: i32, two_hst: bool) -> Result<TreeMetric> {
    if nodes == 0 {
        return Err(Error::InvalidParameter("tree needs at least one node".into()));
    }
    let mut parent = vec![None];
    let mut weight = vec![0.0];
    for v in 1..nodes {
        let p = rng.random_range(0..v);
        let w = if p == 0 {
            2f64.powi(top)
        } else if two_hst {
            weight[p] / 2.0
        } else {
            weight[p] * rng.random_range(0.25..=1.0)
        };
        parent.push(Some(p as Point));
        weight.push(w);
    }
    TreeMetric::new(parent, weight)
}

/// Shortest-path metric of a random complete graph with edge weights in `[1, max_weight]`.
pub fn random_matrix_metric(rng: &mut impl Rng, size: usize, max_weight: f64) -> Result<MetricSpace> {
    let mut d = vec![0.0; size * size];
    for i in 0..size {
        for j in 0..i {
            let w = rng.random_range(1.0..=max_weight.max(1.0));
            d[i * size + j] = w;
            d[j * size + i] = w;
        }
    }
    for k in 0..size {
        for i in 0..size {
            for j in 0..size {
                let via = d[i * size + k] + d[k * size + j];
                if via < d[i * size + j] {
                    d[i * size + j] = via;
                }
            }
        }
    }
    MetricSpace::matrix(size, d, true)
}
