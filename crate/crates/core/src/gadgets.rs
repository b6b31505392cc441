//! Deterministic instance families with known DTW behaviour.
//!
//! Each generator returns both strings, the space they live in and a
//! predicate that the exact DTW (or DTW₀) of the pair satisfies.

use std::fmt;

use crate::dtw::{dtw, dtw0};
use crate::error::{Error, Result};
use crate::metric::{approx_le, MetricSpace, Point};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Expectation {
    DtwAtMost(f64),
    DtwAtLeast(f64),
    DtwEquals(f64),
    Dtw0Equals(u64),
}

impl fmt::Display for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expectation::DtwAtMost(v) => write!(f, "dtw <= {v}"),
            Expectation::DtwAtLeast(v) => write!(f, "dtw >= {v}"),
            Expectation::DtwEquals(v) => write!(f, "dtw == {v}"),
            Expectation::Dtw0Equals(v) => write!(f, "dtw0 == {v}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Index,
    Int,
    Set,
    Linear,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Index => "index",
            Family::Int => "int",
            Family::Set => "set",
            Family::Linear => "linear",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "index" => Family::Index,
            "int" => Family::Int,
            "set" => Family::Set,
            "linear" => Family::Linear,
            _ => return Err(Error::Parse(format!("unknown gadget family '{s}'"))),
        })
    }
}

#[derive(Debug, Clone)]
pub struct GadgetInstance {
    pub family: Family,
    pub space: MetricSpace,
    pub x: Vec<Point>,
    pub y: Vec<Point>,
    pub expected: Expectation,
}

impl GadgetInstance {
    /// The measured value the predicate is about: DTW, or DTW₀ for [`Expectation::Dtw0Equals`].
    pub fn measure(&self) -> Result<f64> {
        match self.expected {
            Expectation::Dtw0Equals(_) => Ok(dtw0(&self.x, &self.y)? as f64),
            _ => dtw(&self.space, &self.x, &self.y),
        }
    }

    /// Evaluates the predicate with the exact oracle.
    pub fn check(&self) -> Result<bool> {
        let v = self.measure()?;
        Ok(match self.expected {
            Expectation::DtwAtMost(b) => approx_le(v, b),
            Expectation::DtwAtLeast(b) => approx_le(b, v),
            Expectation::DtwEquals(b) => approx_le(v, b) && approx_le(b, v),
            Expectation::Dtw0Equals(b) => v == b as f64,
        })
    }
}

fn check_index(i: usize, len: usize) -> Result<()> {
    if i == 0 || i > len {
        return Err(Error::InvalidParameter(format!("index {i} outside 1..={len}")));
    }
    Ok(())
}

fn repeat(out: &mut Vec<Point>, letter: Point, times: usize) {
    out.extend(std::iter::repeat_n(letter, times));
}

/// `Z(1) = 0^α 1^α 2^α` and `Z(0) = 0^α 1 2^α`.
pub fn index_block(bit: bool, alpha: usize) -> Vec<Point> {
    let mut z = Vec::new();
    repeat(&mut z, 0, alpha);
    repeat(&mut z, 1, if bit { alpha } else { 1 });
    repeat(&mut z, 2, alpha);
    z
}

/// `x = Z(b₁)…Z(b_t)`, `y = (012)^(i−1) (02) (012)^(t−i)`; `i` is 1-based.
pub fn gen_index_gadget(bits: &[bool], i: usize, alpha: usize) -> Result<GadgetInstance> {
    check_index(i, bits.len())?;
    if alpha == 0 {
        return Err(Error::InvalidParameter("α must be positive".into()));
    }
    let x = bits.iter().flat_map(|&b| index_block(b, alpha)).collect();
    let mut y = Vec::new();
    for j in 1..=bits.len() {
        if j == i {
            y.extend([0, 2]);
        } else {
            y.extend([0, 1, 2]);
        }
    }
    let expected = if bits[i - 1] {
        Expectation::DtwAtLeast(alpha as f64)
    } else {
        Expectation::DtwAtMost(1.0)
    };
    Ok(GadgetInstance { family: Family::Index, space: MetricSpace::integer_line(3)?, x, y, expected })
}

/// `Z(v) = (0^α, 1, …, v−1, v^α, v+1, …, m−1, m^α)`.
pub fn int_block(v: Point, alpha: usize, m: Point) -> Vec<Point> {
    let mut z = Vec::new();
    repeat(&mut z, 0, alpha);
    z.extend(1..v);
    repeat(&mut z, v, alpha);
    z.extend(v + 1..m);
    repeat(&mut z, m, alpha);
    z
}

/// `x = Z(x₁)…Z(x_k)`, `y = R^(i−1) Y(y_i) R^(k−i)` with `R = (0, 1, …, m)` and
/// `Y(v) = R` without `v`.
pub fn gen_int_gadget(xvec: &[Point], i: usize, yi: Point, alpha: usize, m: Point) -> Result<GadgetInstance> {
    check_index(i, xvec.len())?;
    if m < 2 || (m as usize) > alpha {
        return Err(Error::InvalidParameter(format!("need 2 <= m <= α, got m={m}, α={alpha}")));
    }
    if let Some(&v) = xvec.iter().chain([&yi]).find(|&&v| v == 0 || v >= m) {
        return Err(Error::InvalidParameter(format!("letter {v} outside 1..={}", m - 1)));
    }
    let x = xvec.iter().flat_map(|&v| int_block(v, alpha, m)).collect();
    let mut y = Vec::new();
    for j in 1..=xvec.len() {
        y.extend((0..=m).filter(|&l| j != i || l != yi));
    }
    let expected = if xvec[i - 1] == yi {
        Expectation::DtwAtLeast(alpha as f64)
    } else {
        Expectation::DtwAtMost(1.0)
    };
    Ok(GadgetInstance { family: Family::Int, space: MetricSpace::integer_line(m + 1)?, x, y, expected })
}

/// `x` = the elements of `set` in increasing order, `y = aⁿ`, over generalized Hamming.
pub fn gen_set_gadget(set: &[Point], a: Point, alpha: usize, n: usize) -> Result<GadgetInstance> {
    if alpha == 0 || !n.is_multiple_of(alpha) || set.len() != n / alpha {
        return Err(Error::InvalidParameter(format!(
            "set of size {} does not match n/α = {n}/{alpha}",
            set.len()
        )));
    }
    let mut x = set.to_vec();
    x.sort_unstable();
    x.dedup();
    if x.len() != set.len() {
        return Err(Error::InvalidParameter("set contains duplicates".into()));
    }
    let size = x.iter().copied().chain([a]).max().unwrap() + 1;
    let expected = if x.binary_search(&a).is_ok() {
        Expectation::Dtw0Equals((n / alpha - 1) as u64)
    } else {
        Expectation::Dtw0Equals(n as u64)
    };
    Ok(GadgetInstance {
        family: Family::Set,
        space: MetricSpace::generalized_hamming(size.max(2))?,
        x,
        y: vec![a; n],
        expected,
    })
}

/// `x̄ = (1, x₁, x₁, 1, …, 1, xₙ, xₙ, 1)`.
pub fn linear_base(bits: &[bool]) -> Vec<Point> {
    bits.iter().flat_map(|&b| [1, Point::from(b), Point::from(b), 1]).collect()
}

/// The vector added to `x̄` to obtain `ȳ_i`: a single 1 at 0-based position `4(i−1)+2`.
pub fn linear_addend(n: usize, i: usize) -> Result<Vec<Point>> {
    check_index(i, n)?;
    let mut e = vec![0; 4 * n];
    e[4 * (i - 1) + 2] = 1;
    Ok(e)
}

/// `x̄` against `x̄` with the second copy of `x_i` incremented.
pub fn gen_linear_gadget(bits: &[bool], i: usize) -> Result<GadgetInstance> {
    let e = linear_addend(bits.len(), i)?;
    let x = linear_base(bits);
    let y = x.iter().zip(&e).map(|(a, b)| a + b).collect();
    let expected = Expectation::DtwEquals(if bits[i - 1] { 1.0 } else { 0.0 });
    Ok(GadgetInstance { family: Family::Linear, space: MetricSpace::integer_line(3)?, x, y, expected })
}

/// Parses a string of `0`/`1` characters.
pub fn parse_bits(s: &str) -> Result<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(Error::Parse(format!("bit string contains '{c}'"))),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_examples() {
        assert_eq!(index_block(true, 2), vec![0, 0, 1, 1, 2, 2]);
        let g = gen_index_gadget(&[false, false], 1, 2).unwrap();
        assert_eq!(g.measure().unwrap(), 1.0);
        let g = gen_index_gadget(&[true, false], 1, 2).unwrap();
        assert!(g.measure().unwrap() >= 2.0);
        assert!(g.check().unwrap());
        assert!(gen_index_gadget(&[true], 2, 2).is_err());
    }

    #[test]
    fn int_examples() {
        assert_eq!(int_block(1, 2, 2), vec![0, 0, 1, 1, 2, 2]);
        let g = gen_int_gadget(&[1], 1, 1, 2, 2).unwrap();
        assert!(g.measure().unwrap() >= 2.0);
        let g = gen_int_gadget(&[1], 1, 2, 3, 3).unwrap();
        assert!(g.measure().unwrap() <= 1.0);
        assert!(gen_int_gadget(&[1], 1, 1, 2, 3).is_err());
        assert!(gen_int_gadget(&[2], 1, 1, 2, 2).is_err());
    }

    #[test]
    fn set_examples() {
        let g = gen_set_gadget(&[3, 9], 3, 4, 8).unwrap();
        assert_eq!(g.measure().unwrap(), 1.0);
        let g = gen_set_gadget(&[3, 9], 7, 4, 8).unwrap();
        assert_eq!(g.measure().unwrap(), 8.0);
        let g = gen_set_gadget(&[5], 5, 4, 4).unwrap();
        assert_eq!(g.measure().unwrap(), 0.0);
        assert!(gen_set_gadget(&[1, 2, 3], 1, 4, 8).is_err());
    }

    #[test]
    fn linear_examples() {
        let g = gen_linear_gadget(&[false], 1).unwrap();
        assert_eq!((g.x.clone(), g.y.clone()), (vec![1, 0, 0, 1], vec![1, 0, 1, 1]));
        assert_eq!(g.measure().unwrap(), 0.0);
        let g = gen_linear_gadget(&[true], 1).unwrap();
        assert_eq!(g.y, vec![1, 1, 2, 1]);
        assert_eq!(g.measure().unwrap(), 1.0);
        let e = linear_addend(3, 2).unwrap();
        assert_eq!(e.iter().filter(|&&v| v != 0).count(), 1);
        assert_eq!(e[6], 1);
    }

    #[test]
    fn bit_parsing() {
        assert_eq!(parse_bits("10").unwrap(), vec![true, false]);
        assert!(parse_bits("12").is_err());
    }
}
