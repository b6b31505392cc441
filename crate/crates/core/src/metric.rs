//! Finite metric spaces over dense point identifiers `0..size`.
//!
//! Five flavors are supported: an explicit distance matrix, the integer line,
//! an integer grid under an ℓ_p norm, generalized Hamming space (0/1 distance)
//! and well-separated tree metrics. Distances are `f64`; for integer inputs
//! every distance and every DTW sum below 2^53 is represented exactly.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::decompositions::tree::TreeMetric;
use crate::error::{Error, Result};

/// A point identifier.
pub type Point = u32;

/// Relative tolerance used when comparing non-integer distances.
pub const REL_TOL: f64 = 1e-9;

pub(crate) fn approx_le(a: f64, b: f64) -> bool {
    a <= b + REL_TOL * a.abs().max(b.abs()).max(1.0)
}

pub(crate) fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_TOL * a.abs().max(b.abs()).max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricKind {
    /// Explicit matrix. `metric == false` marks a distance function that is
    /// not required to satisfy the triangle inequality.
    FiniteMatrix { metric: bool },
    IntegerLine,
    LpGrid { dim: u32, p: f64 },
    GeneralizedHamming,
    Tree,
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Matrix { size: usize, d: Arc<Vec<f64>>, metric: bool },
    Line { size: u32 },
    Grid { dim: u32, p: f64, extent: u32 },
    Hamming { size: u32 },
    Tree(Arc<TreeMetric>),
}

/// An immutable finite metric space; cheap to clone and share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpace {
    repr: Repr,
    /// Multiplier applied to every raw distance (set by [`MetricSpace::normalize`]).
    scale: f64,
    min_dist: f64,
    diameter: f64,
}

impl MetricSpace {
    /// A full `size × size` row-major distance matrix.
    pub fn matrix(size: usize, distances: Vec<f64>, metric: bool) -> Result<Self> {
        if size == 0 {
            return Err(Error::DegenerateSpace("empty point set"));
        }
        if distances.len() != size * size {
            return Err(Error::InvalidParameter(format!(
                "expected {} matrix entries, got {}",
                size * size,
                distances.len()
            )));
        }
        if let Some(bad) = distances.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite distance {bad}")));
        }
        if u32::try_from(size).is_err() {
            return Err(Error::InvalidParameter("too many points".into()));
        }
        let (mut min_dist, mut diameter) = (f64::INFINITY, 0.0f64);
        for a in 0..size {
            for b in 0..size {
                let v = distances[a * size + b];
                if a != b && v > 0.0 {
                    min_dist = min_dist.min(v);
                }
                diameter = diameter.max(v);
            }
        }
        Ok(Self::with_extent(
            Repr::Matrix { size, d: Arc::new(distances), metric },
            min_dist,
            diameter,
        ))
    }

    /// Builds a symmetric matrix space from its lower triangle (row `i` holds
    /// `d(i, 0), …, d(i, i)`).
    pub fn from_lower_triangle(rows: &[Vec<f64>], metric: bool) -> Result<Self> {
        let size = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != i + 1 {
                return Err(Error::Parse(format!(
                    "row {i} of the lower triangle must have {} entries, found {}",
                    i + 1,
                    row.len()
                )));
            }
        }
        let mut d = vec![0.0; size * size];
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                d[i * size + j] = v;
                d[j * size + i] = v;
            }
        }
        Self::matrix(size, d, metric)
    }

    /// Points `0..size` with `d(a, b) = |a − b|`.
    pub fn integer_line(size: u32) -> Result<Self> {
        if size == 0 {
            return Err(Error::DegenerateSpace("empty point set"));
        }
        let min = if size >= 2 { 1.0 } else { f64::INFINITY };
        Ok(Self::with_extent(Repr::Line { size }, min, f64::from(size - 1)))
    }

    /// The integer grid `{0..extent}^dim` under the ℓ_p norm, `p >= 1`.
    pub fn lp_grid(dim: u32, p: f64, extent: u32) -> Result<Self> {
        if dim == 0 || extent == 0 {
            return Err(Error::DegenerateSpace("empty point set"));
        }
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::InvalidParameter(format!("ℓ_p exponent must be >= 1, got {p}")));
        }
        let size = u64::from(extent).checked_pow(dim).filter(|&s| s <= u64::from(u32::MAX));
        if size.is_none() {
            return Err(Error::InvalidParameter("grid has too many points".into()));
        }
        let min = if extent >= 2 { 1.0 } else { f64::INFINITY };
        let diameter = f64::from(extent - 1) * f64::from(dim).powf(1.0 / p);
        Ok(Self::with_extent(Repr::Grid { dim, p, extent }, min, diameter))
    }

    /// Points `0..size` with distance 1 between distinct points.
    pub fn generalized_hamming(size: u32) -> Result<Self> {
        if size == 0 {
            return Err(Error::DegenerateSpace("empty point set"));
        }
        let (min, diameter) = if size >= 2 { (1.0, 1.0) } else { (f64::INFINITY, 0.0) };
        Ok(Self::with_extent(Repr::Hamming { size }, min, diameter))
    }

    pub fn tree(tree: TreeMetric) -> Self {
        let min = tree.min_edge().unwrap_or(f64::INFINITY);
        let diameter = tree.max_edge().unwrap_or(0.0);
        Self::with_extent(Repr::Tree(Arc::new(tree)), min, diameter)
    }

    fn with_extent(repr: Repr, min_dist: f64, diameter: f64) -> Self {
        MetricSpace { repr, scale: 1.0, min_dist, diameter }
    }

    pub fn kind(&self) -> MetricKind {
        match &self.repr {
            Repr::Matrix { metric, .. } => MetricKind::FiniteMatrix { metric: *metric },
            Repr::Line { .. } => MetricKind::IntegerLine,
            Repr::Grid { dim, p, .. } => MetricKind::LpGrid { dim: *dim, p: *p },
            Repr::Hamming { .. } => MetricKind::GeneralizedHamming,
            Repr::Tree(_) => MetricKind::Tree,
        }
    }

    pub fn size(&self) -> usize {
        match &self.repr {
            Repr::Matrix { size, .. } => *size,
            Repr::Line { size } | Repr::Hamming { size } => *size as usize,
            Repr::Grid { dim, extent, .. } => (*extent as usize).pow(*dim),
            Repr::Tree(t) => t.len(),
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        (p as usize) < self.size()
    }

    pub fn points(&self) -> impl Iterator<Item = Point> {
        0..self.size() as Point
    }

    /// Distance between two points.
    pub fn distance(&self, a: Point, b: Point) -> Result<f64> {
        for p in [a, b] {
            if !self.contains(p) {
                return Err(Error::UnknownPoint(p));
            }
        }
        Ok(self.dist(a, b))
    }

    /// Distance without membership checks; callers guarantee `a, b < size`.
    #[inline]
    pub fn dist(&self, a: Point, b: Point) -> f64 {
        if a == b {
            // Matrices are not forced to have a zero diagonal; report it verbatim.
            if let Repr::Matrix { size, d, .. } = &self.repr {
                return d[a as usize * size + a as usize] * self.scale;
            }
            return 0.0;
        }
        let raw = match &self.repr {
            Repr::Matrix { size, d, .. } => d[a as usize * size + b as usize],
            Repr::Line { .. } => f64::from(a.abs_diff(b)),
            Repr::Hamming { .. } => 1.0,
            Repr::Grid { dim, p, extent } => grid_distance(*dim, *p, *extent, a, b),
            Repr::Tree(t) => t.distance_unchecked(a, b),
        };
        raw * self.scale
    }

    /// Smallest nonzero pairwise distance (`+∞` for a single point).
    pub fn min_dist(&self) -> f64 {
        self.min_dist * self.scale
    }

    pub fn diameter(&self) -> f64 {
        self.diameter * self.scale
    }

    /// Diameter divided by the smallest nonzero distance.
    pub fn aspect_ratio(&self) -> f64 {
        if self.size() < 2 || self.diameter == 0.0 {
            1.0
        } else {
            self.diameter / self.min_dist
        }
    }

    pub fn is_normalized(&self) -> bool {
        approx_eq(self.min_dist(), 1.0)
    }

    /// Rescales all distances so the smallest nonzero distance is 1.
    pub fn normalize(&self) -> Result<MetricSpace> {
        if self.size() < 2 {
            return Err(Error::DegenerateSpace("normalization needs at least two points"));
        }
        if self.diameter == 0.0 || !self.min_dist.is_finite() {
            return Err(Error::DegenerateSpace("all distances are zero"));
        }
        let factor = 1.0 / self.min_dist();
        if factor == 1.0 {
            return Ok(self.clone());
        }
        Ok(match &self.repr {
            // Rescale the tree itself so r-simplification sees normalized weights.
            Repr::Tree(t) => MetricSpace::tree(t.scaled(self.scale * factor)),
            _ => MetricSpace { scale: self.scale * factor, ..self.clone() },
        })
    }

    /// Underlying tree when this is a tree metric.
    pub fn tree_metric(&self) -> Option<&TreeMetric> {
        match &self.repr {
            Repr::Tree(t) => Some(t),
            _ => None,
        }
    }

    /// Errors unless every letter is a point of this space.
    pub fn check_sequence(&self, letters: &[Point]) -> Result<()> {
        match letters.iter().find(|&&p| !self.contains(p)) {
            Some(&p) => Err(Error::UnknownPoint(p)),
            None => Ok(()),
        }
    }

    /// Point id of grid coordinates (first coordinate varies fastest).
    pub fn grid_point(&self, coords: &[u32]) -> Result<Point> {
        let Repr::Grid { dim, extent, .. } = &self.repr else {
            return Err(Error::InvalidParameter("not a grid space".into()));
        };
        if coords.len() != *dim as usize {
            return Err(Error::InvalidParameter(format!(
                "expected {dim} coordinates, got {}",
                coords.len()
            )));
        }
        let mut id: u64 = 0;
        for &c in coords.iter().rev() {
            if c >= *extent {
                return Err(Error::InvalidParameter(format!("coordinate {c} outside 0..{extent}")));
            }
            id = id * u64::from(*extent) + u64::from(c);
        }
        Ok(id as Point)
    }

    pub fn grid_coords(&self, p: Point) -> Option<Vec<u32>> {
        match &self.repr {
            Repr::Grid { dim, extent, .. } if self.contains(p) => Some(decode_grid(*dim, *extent, p)),
            _ => None,
        }
    }

    /// Line extent / grid parameters, used by the grid partitions.
    pub(crate) fn grid_params(&self) -> Option<(u32, f64, u32)> {
        match &self.repr {
            Repr::Line { size } => Some((1, 1.0, *size)),
            Repr::Grid { dim, p, extent } => Some((*dim, *p, *extent)),
            _ => None,
        }
    }

    /// Distance scale factor relative to the raw representation.
    pub(crate) fn scale(&self) -> f64 {
        self.scale
    }

    /// Checks symmetry, zero diagonal, non-negativity and (for metric kinds)
    /// the triangle inequality by exhaustive scan. Violations are listed,
    /// never thrown.
    ///
    /// `poly` optionally asks whether the size and aspect ratio are at most
    /// `n^exponent`.
    pub fn validate(&self, poly: Option<(usize, f64)>) -> ValidationReport {
        let size = self.size();
        let mut violations = Vec::new();
        let check_triangle = !matches!(self.kind(), MetricKind::FiniteMatrix { metric: false });
        // Non-matrix kinds are metrics by construction; scan them only when small.
        let exhaustive = matches!(self.repr, Repr::Matrix { .. }) || size <= 64;
        if exhaustive {
            for a in 0..size as Point {
                let daa = self.dist(a, a);
                if daa != 0.0 {
                    violations.push(Violation::NonzeroDiagonal { a, value: daa });
                }
                for b in 0..size as Point {
                    if a == b {
                        continue;
                    }
                    let (ab, ba) = (self.dist(a, b), self.dist(b, a));
                    if ab < 0.0 {
                        violations.push(Violation::Negative { a, b, value: ab });
                    }
                    if a < b && !approx_eq(ab, ba) {
                        violations.push(Violation::Asymmetric { a, b, ab, ba });
                    }
                    if a < b && ab == 0.0 {
                        violations.push(Violation::ZeroOffDiagonal { a, b });
                    }
                }
            }
            if check_triangle {
                for a in 0..size as Point {
                    for b in 0..size as Point {
                        let ab = self.dist(a, b);
                        for c in 0..size as Point {
                            let through = ab + self.dist(b, c);
                            let direct = self.dist(a, c);
                            if !approx_le(direct, through) {
                                violations.push(Violation::Triangle { a, b, c, direct, through });
                            }
                        }
                    }
                }
            }
        }
        let aspect_ratio = self.aspect_ratio();
        let poly_bounded = poly.map(|(n, exponent)| {
            let bound = (n.max(2) as f64).powf(exponent);
            size as f64 <= bound && aspect_ratio <= bound
        });
        ValidationReport { size, aspect_ratio, violations, poly_bounded }
    }

    /// Parses the text metric format (see [`MetricSpace::to_text`]).
    pub fn parse(text: &str) -> Result<MetricSpace> {
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("missing header line".into()))?;
        let mut words = header.split_whitespace();
        let kind = words.next().unwrap_or("");
        let mut num = |what: &str| -> Result<f64> {
            let w = words.next().ok_or_else(|| Error::Parse(format!("header lacks {what}")))?;
            w.parse::<f64>().map_err(|_| Error::Parse(format!("bad {what}: {w}")))
        };
        match kind {
            "line" => MetricSpace::integer_line(num("size")? as u32),
            "hamming" => MetricSpace::generalized_hamming(num("size")? as u32),
            "grid" => {
                let dim = num("dimension")? as u32;
                let p = num("exponent")?;
                let extent = num("extent")? as u32;
                MetricSpace::lp_grid(dim, p, extent)
            }
            "matrix" => {
                let size = num("size")? as usize;
                let metric = !header.split_whitespace().any(|w| w == "nonmetric");
                let rows = lines
                    .take(size)
                    .map(|l| {
                        l.split_whitespace()
                            .map(|w| w.parse::<f64>().map_err(|_| Error::Parse(format!("bad distance {w}"))))
                            .collect::<Result<Vec<f64>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                if rows.len() != size {
                    return Err(Error::Parse(format!("expected {size} matrix rows, found {}", rows.len())));
                }
                MetricSpace::from_lower_triangle(&rows, metric)
            }
            "tree" => {
                let size = num("node count")? as usize;
                let mut parent = vec![None; size];
                let mut weight = vec![0.0; size];
                for l in lines {
                    let f: Vec<&str> = l.split_whitespace().collect();
                    if f.len() != 3 {
                        return Err(Error::Parse(format!("tree edge line needs `node parent weight`: {l}")));
                    }
                    let parse_id = |s: &str| s.parse::<u32>().map_err(|_| Error::Parse(format!("bad node id {s}")));
                    let (v, p) = (parse_id(f[0])?, parse_id(f[1])?);
                    let w = f[2].parse::<f64>().map_err(|_| Error::Parse(format!("bad weight {}", f[2])))?;
                    if v as usize >= size {
                        return Err(Error::UnknownPoint(v));
                    }
                    parent[v as usize] = Some(p);
                    weight[v as usize] = w;
                }
                Ok(MetricSpace::tree(TreeMetric::new(parent, weight)?))
            }
            other => Err(Error::Parse(format!("unknown metric kind `{other}`"))),
        }
    }

    /// Serializes to the text metric format: a header line `kind …`; for
    /// matrices, the lower triangle follows one row per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match &self.repr {
            Repr::Line { size } if self.scale == 1.0 => writeln!(out, "line {size}").unwrap(),
            Repr::Hamming { size } if self.scale == 1.0 => writeln!(out, "hamming {size}").unwrap(),
            Repr::Grid { dim, p, extent } if self.scale == 1.0 => {
                writeln!(out, "grid {dim} {p} {extent}").unwrap()
            }
            Repr::Tree(t) => {
                writeln!(out, "tree {}", t.len()).unwrap();
                for v in 0..t.len() as Point {
                    if let Some(p) = t.parent(v) {
                        writeln!(out, "{v} {p} {}", t.edge_weight(v)).unwrap();
                    }
                }
            }
            _ => {
                let size = self.size();
                let metric = !matches!(self.kind(), MetricKind::FiniteMatrix { metric: false });
                writeln!(out, "matrix {size}{}", if metric { "" } else { " nonmetric" }).unwrap();
                for a in 0..size as Point {
                    let row: Vec<String> = (0..=a).map(|b| self.dist(a, b).to_string()).collect();
                    writeln!(out, "{}", row.join(" ")).unwrap();
                }
            }
        }
        out
    }
}

fn decode_grid(dim: u32, extent: u32, mut p: Point) -> Vec<u32> {
    (0..dim)
        .map(|_| {
            let c = p % extent;
            p /= extent;
            c
        })
        .collect()
}

fn grid_distance(dim: u32, p: f64, extent: u32, a: Point, b: Point) -> f64 {
    let (mut a, mut b) = (a, b);
    let mut acc = 0.0;
    for _ in 0..dim {
        let diff = f64::from((a % extent).abs_diff(b % extent));
        a /= extent;
        b /= extent;
        acc += if p == 1.0 {
            diff
        } else if p == 2.0 {
            diff * diff
        } else {
            diff.powf(p)
        };
    }
    if p == 1.0 {
        acc
    } else if p == 2.0 {
        acc.sqrt()
    } else {
        acc.powf(1.0 / p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NonzeroDiagonal { a: Point, value: f64 },
    Negative { a: Point, b: Point, value: f64 },
    Asymmetric { a: Point, b: Point, ab: f64, ba: f64 },
    ZeroOffDiagonal { a: Point, b: Point },
    Triangle { a: Point, b: Point, c: Point, direct: f64, through: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub size: usize,
    pub aspect_ratio: f64,
    pub violations: Vec<Violation>,
    /// Answer to the optional polynomial size/aspect-ratio question.
    pub poly_bounded: Option<bool>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}
