//! (r, α)-gap DTW: answer 0 when `dtw <= n·r/α`, 1 when `dtw > n·r`.
//!
//! The tree variant runs bounded (α/4)-DTW on r-simplified strings and
//! answers 1 on Fail or when the estimate exceeds `n·r/4`. The partition
//! variant snaps both strings to the representatives of a random partition
//! of diameter `c₁·r`, runs bounded DTW, and answers 1 on Fail or when the
//! estimate exceeds `n·r/2`; the bit is a majority over independent
//! partitions.

use super::bounded::{self, BoundedMessage};
use super::ProtocolOutcome;
use crate::decompositions::{r_simplify, sample_partition};
use crate::doc_exchange::Backend;
use crate::error::{Error, Result};
use crate::metric::{MetricSpace, Point};
use crate::randomness::SharedRandomness;
use crate::wire::{BitReader, BitWriter};

pub const DEFAULT_C1: f64 = 0.1;
pub const DEFAULT_PARTITION_FACTOR: f64 = 82.0;

fn check_r(r: f64) -> Result<()> {
    if !(r.is_finite() && r >= 1.0) {
        return Err(Error::Precondition(format!("gap threshold r must be >= 1, got {r}")));
    }
    Ok(())
}

fn clamp_alpha(alpha: u64, n: usize) -> u32 {
    alpha.clamp(1, n.min(usize::from(u16::MAX)) as u64) as u32
}

fn tree_of(space: &MetricSpace) -> Result<&crate::decompositions::TreeMetric> {
    space
        .tree_metric()
        .ok_or_else(|| Error::Precondition("tree gap protocol needs a tree metric".into()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeGapMessage {
    pub r: f64,
    pub bounded: BoundedMessage,
}

pub fn tree_alice(
    space: &MetricSpace,
    x: &[Point],
    r: f64,
    alpha: u32,
    delta: f64,
    rand: &SharedRandomness,
    backend: Backend,
) -> Result<TreeGapMessage> {
    check_r(r)?;
    let simplified = r_simplify(tree_of(space)?, x, r)?;
    let alpha_b = clamp_alpha(u64::from(alpha / 4), x.len());
    let bounded = bounded::alice(space, &simplified, alpha_b, delta, &rand.derive("bounded"), backend)?;
    Ok(TreeGapMessage { r, bounded })
}

/// The gap bit together with the bounded estimate it was decided from.
pub fn tree_bob_detailed(
    space: &MetricSpace,
    msg: &TreeGapMessage,
    y: &[Point],
    rand: &SharedRandomness,
) -> Result<(u8, ProtocolOutcome)> {
    check_r(msg.r)?;
    let simplified = r_simplify(tree_of(space)?, y, msg.r)?;
    let z = bounded::bob(space, &msg.bounded, &simplified, &rand.derive("bounded"))?;
    let n = msg.bounded.n.max(y.len()) as f64;
    let bit = match z {
        ProtocolOutcome::Estimate(t) if t <= n * msg.r / 4.0 => 0,
        _ => 1,
    };
    Ok((bit, z))
}

pub fn tree_bob(space: &MetricSpace, msg: &TreeGapMessage, y: &[Point], rand: &SharedRandomness) -> Result<u8> {
    Ok(tree_bob_detailed(space, msg, y, rand)?.0)
}

impl TreeGapMessage {
    pub fn bits(&self) -> u64 {
        64 + self.bounded.bits()
    }

    pub fn write(&self, w: &mut BitWriter) {
        w.write_f64(self.r);
        self.bounded.write(w);
    }

    pub fn read(r: &mut BitReader, n: usize) -> Result<Self> {
        let thr = r.read_f64()?;
        check_r(thr).map_err(|e| Error::Wire(e.to_string()))?;
        Ok(TreeGapMessage { r: thr, bounded: BoundedMessage::read(r, n)? })
    }
}

/// Constants of the partition variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionParams {
    /// Partition diameter as a fraction of r.
    pub c1: f64,
    /// Divisor in `α′ = ⌊α·c₁/(factor·σ)⌋`.
    pub factor: f64,
    /// Declared separation constant of the space.
    pub sigma: f64,
}

impl PartitionParams {
    pub fn for_space(space: &MetricSpace) -> Self {
        PartitionParams {
            c1: DEFAULT_C1,
            factor: DEFAULT_PARTITION_FACTOR,
            sigma: crate::decompositions::declared_sigma(space),
        }
    }

    /// `α·c₁/(factor·σ)` before rounding.
    pub fn raw_alpha(&self, alpha: u32) -> f64 {
        f64::from(alpha) * self.c1 / (self.factor * self.sigma)
    }

    /// Approximation factor of the inner bounded protocol.
    pub fn inner_alpha(&self, alpha: u32) -> u64 {
        ((self.raw_alpha(alpha) + 1e-9).floor() as u64).max(1)
    }

    fn check(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !(ok(self.c1) && ok(self.factor) && ok(self.sigma)) {
            return Err(Error::InvalidParameter(format!("invalid partition constants {self:?}")));
        }
        Ok(())
    }
}

/// Majority-vote repetitions for failure probability δ.
pub fn repetitions(delta: f64) -> usize {
    ((18.0 * (1.0 / delta).ln()).ceil() as usize).max(1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionGapMessage {
    pub r: f64,
    pub params: PartitionParams,
    pub reps: Vec<BoundedMessage>,
}

#[allow(clippy::too_many_arguments)]
pub fn partition_alice(
    space: &MetricSpace,
    x: &[Point],
    r: f64,
    alpha: u32,
    delta: f64,
    params: PartitionParams,
    rand: &SharedRandomness,
    backend: Backend,
) -> Result<PartitionGapMessage> {
    check_r(r)?;
    params.check()?;
    let count = repetitions(delta);
    if count > usize::from(u16::MAX) {
        return Err(Error::InvalidParameter(format!("δ = {delta} needs too many repetitions")));
    }
    let alpha_b = clamp_alpha(params.inner_alpha(alpha), x.len());
    let reps = (0..count)
        .map(|j| {
            let rep = rand.derive(&format!("rep:{j}"));
            let part = sample_partition(space, params.c1 * r, &rep.derive("partition"))?;
            bounded::alice(space, &part.snap(x), alpha_b, delta, &rep.derive("bounded"), backend)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PartitionGapMessage { r, params, reps })
}

/// The majority bit and the number of repetitions that voted 1.
pub fn partition_bob_detailed(
    space: &MetricSpace,
    msg: &PartitionGapMessage,
    y: &[Point],
    rand: &SharedRandomness,
) -> Result<(u8, usize)> {
    check_r(msg.r)?;
    let mut ones = 0;
    for (j, m) in msg.reps.iter().enumerate() {
        let rep = rand.derive(&format!("rep:{j}"));
        let part = sample_partition(space, msg.params.c1 * msg.r, &rep.derive("partition"))?;
        let z = bounded::bob(space, m, &part.snap(y), &rep.derive("bounded"))?;
        let n = m.n.max(y.len()) as f64;
        match z {
            ProtocolOutcome::Estimate(t) if t <= n * msg.r / 2.0 => {}
            _ => ones += 1,
        }
    }
    let bit = u8::from(2 * ones >= msg.reps.len());
    Ok((bit, ones))
}

pub fn partition_bob(
    space: &MetricSpace,
    msg: &PartitionGapMessage,
    y: &[Point],
    rand: &SharedRandomness,
) -> Result<u8> {
    Ok(partition_bob_detailed(space, msg, y, rand)?.0)
}

impl PartitionGapMessage {
    pub fn bits(&self) -> u64 {
        4 * 64 + 16 + self.reps.iter().map(BoundedMessage::bits).sum::<u64>()
    }

    pub fn write(&self, w: &mut BitWriter) {
        w.write_f64(self.r);
        w.write_f64(self.params.c1);
        w.write_f64(self.params.factor);
        w.write_f64(self.params.sigma);
        w.write(self.reps.len() as u64, 16);
        for m in &self.reps {
            m.write(w);
        }
    }

    pub fn read(r: &mut BitReader, n: usize) -> Result<Self> {
        let thr = r.read_f64()?;
        let params = PartitionParams { c1: r.read_f64()?, factor: r.read_f64()?, sigma: r.read_f64()? };
        check_r(thr).and(params.check()).map_err(|e| Error::Wire(e.to_string()))?;
        let count = r.read(16)? as usize;
        let reps = (0..count).map(|_| BoundedMessage::read(r, n)).collect::<Result<Vec<_>>>()?;
        Ok(PartitionGapMessage { r: thr, params, reps })
    }
}
