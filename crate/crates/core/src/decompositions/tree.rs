//! Well-separated tree metrics.
//!
//! Nodes of the tree are the alphabet itself. The distance between two nodes
//! is the weight of the heaviest edge on the path joining them, and weights
//! never increase along a root-to-leaf path.

use crate::error::{Error, Result};
use crate::metric::Point;

const WEIGHT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct TreeMetric {
    parent: Vec<Option<Point>>,
    /// Weight of the edge from a node to its parent; zero at the root.
    weight: Vec<f64>,
    depth: Vec<u32>,
    root: Point,
}

impl TreeMetric {
    /// Builds a tree from parent links and the weight of each node's parent edge.
    ///
    /// The root is the unique node without a parent; its weight entry is ignored.
    pub fn new(parent: Vec<Option<Point>>, weight: Vec<f64>) -> Result<Self> {
        let n = parent.len();
        if n == 0 {
            return Err(Error::DegenerateSpace("tree has no nodes"));
        }
        if weight.len() != n {
            return Err(Error::InvalidParameter(format!(
                "tree has {n} nodes but {} edge weights",
                weight.len()
            )));
        }
        let roots: Vec<usize> = (0..n).filter(|&v| parent[v].is_none()).collect();
        if roots.len() != 1 {
            return Err(Error::InvalidParameter(format!(
                "tree must have exactly one root, found {}",
                roots.len()
            )));
        }
        let root = roots[0] as Point;
        for (v, p) in parent.iter().enumerate() {
            if let Some(p) = *p {
                if p as usize >= n {
                    return Err(Error::UnknownPoint(p));
                }
                let w = weight[v];
                if !(w.is_finite() && w > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "edge above node {v} has non-positive weight {w}"
                    )));
                }
            }
        }

        // Depths, with cycle detection.
        const UNSET: u32 = u32::MAX;
        let mut depth = vec![UNSET; n];
        depth[root as usize] = 0;
        let mut stack = Vec::new();
        for start in 0..n {
            let mut v = start;
            while depth[v] == UNSET {
                if stack.len() > n {
                    return Err(Error::InvalidParameter("tree parent links contain a cycle".into()));
                }
                stack.push(v);
                v = parent[v].expect("only the root lacks a parent") as usize;
            }
            let mut d = depth[v];
            while let Some(u) = stack.pop() {
                d += 1;
                depth[u] = d;
            }
        }

        let mut weight = weight;
        weight[root as usize] = 0.0;
        let tree = TreeMetric { parent, weight, depth, root };
        for v in 0..n {
            if let Some(p) = tree.parent[v] {
                if p != root && tree.weight[v] > tree.weight[p as usize] * (1.0 + WEIGHT_TOL) {
                    return Err(Error::InvalidParameter(format!(
                        "edge above node {v} (weight {}) is heavier than the edge above its parent {p} (weight {})",
                        tree.weight[v], tree.weight[p as usize]
                    )));
                }
            }
        }
        Ok(tree)
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn root(&self) -> Point {
        self.root
    }

    pub fn parent(&self, v: Point) -> Option<Point> {
        self.parent[v as usize]
    }

    pub fn edge_weight(&self, v: Point) -> f64 {
        self.weight[v as usize]
    }

    pub fn depth(&self, v: Point) -> u32 {
        self.depth[v as usize]
    }

    pub fn contains(&self, v: Point) -> bool {
        (v as usize) < self.len()
    }

    /// True when every child edge weighs at most half of its parent edge.
    pub fn is_two_hst(&self) -> bool {
        (0..self.len()).all(|v| match self.parent[v] {
            Some(p) if p != self.root => {
                self.weight[v] <= self.weight[p as usize] / 2.0 * (1.0 + WEIGHT_TOL)
            }
            _ => true,
        })
    }

    pub fn min_edge(&self) -> Option<f64> {
        self.non_root_weights().reduce(f64::min)
    }

    pub fn max_edge(&self) -> Option<f64> {
        self.non_root_weights().reduce(f64::max)
    }

    fn non_root_weights(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).filter(|&v| v as Point != self.root).map(|v| self.weight[v])
    }

    /// Heaviest edge on the path between `a` and `b`.
    pub fn distance(&self, a: Point, b: Point) -> Result<f64> {
        for p in [a, b] {
            if !self.contains(p) {
                return Err(Error::UnknownPoint(p));
            }
        }
        Ok(self.distance_unchecked(a, b))
    }

    pub(crate) fn distance_unchecked(&self, a: Point, b: Point) -> f64 {
        let (mut a, mut b) = (a as usize, b as usize);
        let mut heaviest = 0.0f64;
        while self.depth[a] > self.depth[b] {
            heaviest = heaviest.max(self.weight[a]);
            a = self.parent[a].unwrap() as usize;
        }
        while self.depth[b] > self.depth[a] {
            heaviest = heaviest.max(self.weight[b]);
            b = self.parent[b].unwrap() as usize;
        }
        while a != b {
            heaviest = heaviest.max(self.weight[a]).max(self.weight[b]);
            a = self.parent[a].unwrap() as usize;
            b = self.parent[b].unwrap() as usize;
        }
        heaviest
    }

    /// For every node, its highest ancestor reachable through edges of weight at most `r / 4`.
    pub fn simplification_map(&self, r: f64) -> Vec<Point> {
        let limit = r / 4.0;
        (0..self.len() as Point)
            .map(|mut v| {
                while let Some(p) = self.parent[v as usize] {
                    if self.weight[v as usize] > limit {
                        break;
                    }
                    v = p;
                }
                v
            })
            .collect()
    }

    /// Same tree with every edge weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> TreeMetric {
        TreeMetric {
            parent: self.parent.clone(),
            weight: self.weight.iter().map(|w| w * factor).collect(),
            depth: self.depth.clone(),
            root: self.root,
        }
    }
}

/// Tree distance between two nodes: the heaviest edge on their path.
pub fn tree_distance(tree: &TreeMetric, a: Point, b: Point) -> Result<f64> {
    tree.distance(a, b)
}

/// The r-simplification of `x`: every letter is replaced by its highest
/// ancestor reachable through edges of weight at most `r / 4`.
pub fn r_simplify(tree: &TreeMetric, x: &[Point], r: f64) -> Result<Vec<Point>> {
    if !(r.is_finite() && r >= 1.0) {
        return Err(Error::Precondition(format!("r-simplification needs r >= 1, got {r}")));
    }
    if let Some(&bad) = x.iter().find(|&&l| !tree.contains(l)) {
        return Err(Error::UnknownPoint(bad));
    }
    let map = tree.simplification_map(r);
    Ok(x.iter().map(|&l| map[l as usize]).collect())
}
