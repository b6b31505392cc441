//! Turns a gap protocol into an α-approximation.
//!
//! Alice sends a bounded α-DTW message and one gap message (at approximation
//! α/2) per threshold `r = 2^i`, `i = 0..=⌈log₂(2nκα)⌉`. Bob uses the bounded
//! estimate when there is one; otherwise he finds the smallest rung whose gap
//! bit is 0, either scanning upward or by binary search, and returns `2^i·n`.

use super::bounded::{self, BoundedMessage};
use super::gap::{self, PartitionGapMessage, PartitionParams, TreeGapMessage};
use super::ProtocolOutcome;
use crate::doc_exchange::Backend;
use crate::error::{Error, Result};
use crate::metric::{MetricSpace, Point};
use crate::randomness::SharedRandomness;
use crate::wire::{BitReader, BitWriter};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Search {
    Linear,
    Binary,
}

impl std::str::FromStr for Search {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Search::Linear),
            "binary" => Ok(Search::Binary),
            _ => Err(Error::Parse(format!("unknown search mode '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GapKind {
    Tree,
    Partition(PartitionParams),
}

#[derive(Debug, Clone, PartialEq)]
pub enum GapMessage {
    Tree(TreeGapMessage),
    Partition(PartitionGapMessage),
}

impl GapMessage {
    pub fn bits(&self) -> u64 {
        match self {
            GapMessage::Tree(m) => m.bits(),
            GapMessage::Partition(m) => m.bits(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LadderMessage {
    pub search: Search,
    pub bounded: BoundedMessage,
    pub rungs: Vec<GapMessage>,
}

/// Bob's answer with the rungs he looked at, in evaluation order.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderReport {
    pub outcome: ProtocolOutcome,
    /// Rung the estimate came from; `None` when the bounded stage answered.
    pub rung: Option<usize>,
    pub evaluated: Vec<(usize, u8)>,
}

/// Index of the top rung, `⌈log₂(2nκα)⌉`.
pub fn top_rung(n: usize, aspect_ratio: f64, alpha: u32) -> usize {
    (2.0 * n as f64 * aspect_ratio * f64::from(alpha)).log2().ceil().max(0.0) as usize
}

/// Failure budget of a single rung.
pub fn rung_delta(delta: f64, rungs: usize, search: Search) -> f64 {
    match search {
        Search::Linear => delta / (2 * rungs) as f64,
        Search::Binary => delta / (2.0 * ((rungs as f64).log2().ceil() + 1.0)),
    }
}

#[allow(clippy::too_many_arguments)]
pub fn alice(
    space: &MetricSpace,
    x: &[Point],
    alpha: u32,
    delta: f64,
    kind: GapKind,
    search: Search,
    rand: &SharedRandomness,
    backend: Backend,
) -> Result<LadderMessage> {
    if x.is_empty() {
        return Err(Error::EmptySequence);
    }
    if !space.is_normalized() {
        return Err(Error::Precondition("ladder needs a normalized space".into()));
    }
    let n = x.len();
    let bounded_alpha = (alpha as usize).clamp(1, n) as u32;
    let bounded = bounded::alice(space, x, bounded_alpha, delta / 2.0, &rand.derive("bounded"), backend)?;
    let count = top_rung(n, space.aspect_ratio(), alpha) + 1;
    if count > 255 {
        return Err(Error::InvalidParameter(format!("{count} rungs exceed the 255-rung limit")));
    }
    let gap_alpha = (alpha / 2).max(1);
    let rung_delta = rung_delta(delta, count, search);
    let rungs = (0..count)
        .map(|i| {
            let r = 2f64.powi(i as i32);
            let rr = rand.derive(&format!("gap:{i}"));
            Ok(match kind {
                GapKind::Tree => GapMessage::Tree(gap::tree_alice(space, x, r, gap_alpha, rung_delta, &rr, backend)?),
                GapKind::Partition(p) => GapMessage::Partition(gap::partition_alice(
                    space, x, r, gap_alpha, rung_delta, p, &rr, backend,
                )?),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LadderMessage { search, bounded, rungs })
}

fn rung_bit(space: &MetricSpace, msg: &GapMessage, y: &[Point], rand: &SharedRandomness) -> Result<u8> {
    match msg {
        GapMessage::Tree(m) => gap::tree_bob(space, m, y, rand),
        GapMessage::Partition(m) => gap::partition_bob(space, m, y, rand),
    }
}

pub fn bob_detailed(
    space: &MetricSpace,
    msg: &LadderMessage,
    y: &[Point],
    rand: &SharedRandomness,
) -> Result<LadderReport> {
    let first = bounded::bob(space, &msg.bounded, y, &rand.derive("bounded"))?;
    if let ProtocolOutcome::Estimate(_) = first {
        return Ok(LadderReport { outcome: first, rung: None, evaluated: Vec::new() });
    }
    let mut evaluated = Vec::new();
    let mut bit = |i: usize| -> Result<u8> {
        let b = rung_bit(space, &msg.rungs[i], y, &rand.derive(&format!("gap:{i}")))?;
        evaluated.push((i, b));
        Ok(b)
    };
    let top = msg.rungs.len().checked_sub(1).ok_or_else(|| Error::Wire("ladder without rungs".into()))?;
    let found = match msg.search {
        Search::Linear => {
            let mut found = None;
            for i in 0..=top {
                if bit(i)? == 0 {
                    found = Some(i);
                    break;
                }
            }
            found
        }
        Search::Binary => {
            if bit(top)? == 0 {
                // Invariant: bit(hi) = 0, and bit(lo) = 1 unless lo is the virtual rung -1.
                let (mut lo, mut hi) = (-1i64, top as i64);
                while hi - lo > 1 {
                    let mid = (lo + hi) / 2;
                    if bit(mid as usize)? == 0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                Some(hi as usize)
            } else {
                None
            }
        }
    };
    let Some(i) = found else {
        return Err(Error::InvariantViolation(format!("no rung up to {top} answered 0")));
    };
    let n = msg.bounded.n.max(y.len()) as f64;
    Ok(LadderReport { outcome: ProtocolOutcome::Estimate(2f64.powi(i as i32) * n), rung: Some(i), evaluated })
}

impl LadderMessage {
    pub fn bits(&self) -> u64 {
        1 + 1 + 8 + self.bounded.bits() + self.rungs.iter().map(GapMessage::bits).sum::<u64>()
    }

    pub fn write(&self, w: &mut BitWriter) {
        w.write_bool(self.search == Search::Binary);
        w.write_bool(matches!(self.rungs.first(), Some(GapMessage::Partition(_))));
        w.write(self.rungs.len() as u64, 8);
        self.bounded.write(w);
        for rung in &self.rungs {
            match rung {
                GapMessage::Tree(m) => m.write(w),
                GapMessage::Partition(m) => m.write(w),
            }
        }
    }

    pub fn read(r: &mut BitReader, n: usize) -> Result<Self> {
        let search = if r.read_bool()? { Search::Binary } else { Search::Linear };
        let partition = r.read_bool()?;
        let count = r.read(8)? as usize;
        let bounded = BoundedMessage::read(r, n)?;
        let rungs = (0..count)
            .map(|_| {
                Ok(if partition {
                    GapMessage::Partition(PartitionGapMessage::read(r, n)?)
                } else {
                    GapMessage::Tree(TreeGapMessage::read(r, n)?)
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LadderMessage { search, bounded, rungs })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompositions::TreeMetric;
    use crate::dtw::dtw;
    use rand::Rng;

    fn star(arms: usize) -> MetricSpace {
        let mut parent = vec![None];
        let mut weight = vec![0.0];
        for a in 0..arms {
            parent.push(Some(0));
            weight.push(8.0);
            parent.push(Some(a as u32 * 2 + 1));
            weight.push(1.0);
        }
        MetricSpace::tree(TreeMetric::new(parent, weight).unwrap())
    }

    #[test]
    fn rung_count() {
        assert_eq!(top_rung(512, 1.0, 32), 15);
        assert_eq!(top_rung(1, 1.0, 1), 1);
    }

    #[test]
    fn identical_uses_bounded_stage() {
        let space = star(4);
        let rand = SharedRandomness::new(0);
        let x: Vec<Point> = (0..30).map(|i| (i % 9) as Point).collect();
        let msg = alice(&space, &x, 16, 0.1, GapKind::Tree, Search::Linear, &rand, Backend::Auto).unwrap();
        let rep = bob_detailed(&space, &msg, &x, &rand).unwrap();
        assert_eq!(rep.outcome, ProtocolOutcome::Estimate(0.0));
        assert_eq!(rep.rung, None);
    }

    #[test]
    fn modes_agree_and_bracket() {
        let space = star(4);
        let mut rng = SharedRandomness::new(77).rng();
        for seed in 0..20 {
            let x: Vec<Point> = (0..24).map(|_| rng.random_range(0..9)).collect();
            let y: Vec<Point> = (0..24).map(|_| rng.random_range(0..9)).collect();
            let rand = SharedRandomness::new(seed);
            let d = dtw(&space, &x, &y).unwrap();
            let mut rungs = Vec::new();
            for search in [Search::Linear, Search::Binary] {
                let msg = alice(&space, &x, 8, 0.1, GapKind::Tree, search, &rand, Backend::Auto).unwrap();
                let rep = bob_detailed(&space, &msg, &y, &rand).unwrap();
                let ProtocolOutcome::Estimate(t) = rep.outcome else { panic!() };
                assert!(d <= t + 1e-9 && t <= 8.0 * d + 1e-9, "d={d} t={t}");
                if let Some(i) = rep.rung {
                    let bits: std::collections::HashMap<_, _> = rep.evaluated.iter().copied().collect();
                    assert_eq!(bits[&i], 0);
                    assert!(i == 0 || bits[&(i - 1)] == 1);
                }
                rungs.push(rep.rung);
            }
            assert_eq!(rungs[0], rungs[1]);
        }
    }

    #[test]
    fn serialization() {
        let space = star(2);
        let rand = SharedRandomness::new(2);
        let x: Vec<Point> = (0..12).map(|i| (i % 5) as Point).collect();
        let msg = alice(&space, &x, 8, 0.1, GapKind::Tree, Search::Binary, &rand, Backend::Auto).unwrap();
        let mut w = BitWriter::new();
        msg.write(&mut w);
        assert_eq!(w.bit_len(), msg.bits());
        let framed = w.into_framed();
        let mut r = BitReader::from_framed(&framed).unwrap();
        assert_eq!(LadderMessage::read(&mut r, 12).unwrap(), msg);
        r.finish().unwrap();
    }
}
