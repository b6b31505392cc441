//! α-DTW for tree metrics, general finite metrics and separable metrics.
//!
//! Every function here expects a normalized space. Below each route's
//! minimum α, Alice sends `x` verbatim and Bob computes DTW exactly.

use super::ladder::{self, GapKind, LadderMessage, Search};
use super::gap::PartitionParams;
use super::{ProtocolConfig, ProtocolOutcome};
use crate::decompositions::{declared_sigma, frt_embed, EmbeddingResult};
use crate::dtw::dtw_unchecked;
use crate::error::{Error, Result};
use crate::metric::{MetricKind, MetricSpace, Point};
use crate::randomness::SharedRandomness;
use crate::wire::{width_for, BitReader, BitWriter};

/// Smallest α for which the tree route runs the ladder.
pub const TREE_MIN_ALPHA: u32 = 8;

#[derive(Debug, Clone, PartialEq)]
pub enum TopBody {
    Verbatim { width: u32, letters: Vec<Point> },
    Ladder(LadderMessage),
    /// Tree protocol on the image of an embedding into a tree.
    Embedded { alpha_tree: u32, inner: Box<TopBody> },
}

fn verbatim(space: &MetricSpace, x: &[Point]) -> TopBody {
    TopBody::Verbatim { width: width_for(space.size().saturating_sub(1) as u64), letters: x.to_vec() }
}

pub fn tree_alice(
    space: &MetricSpace,
    x: &[Point],
    alpha: u32,
    cfg: &ProtocolConfig,
    rand: &SharedRandomness,
) -> Result<TopBody> {
    if space.kind() != MetricKind::Tree {
        return Err(Error::Precondition("tree protocol needs a tree metric".into()));
    }
    if alpha < TREE_MIN_ALPHA {
        return Ok(verbatim(space, x));
    }
    let search = cfg.search.unwrap_or(Search::Linear);
    let msg = ladder::alice(space, x, alpha, cfg.delta, GapKind::Tree, search, rand, cfg.backend)?;
    Ok(TopBody::Ladder(msg))
}

/// `2·c_emb·log₂|Σ|`: below this the general route sends `x` verbatim.
pub fn general_min_alpha(space: &MetricSpace, c_emb: f64) -> f64 {
    2.0 * c_emb * (space.size() as f64).log2()
}

pub fn embed(space: &MetricSpace, rand: &SharedRandomness) -> Result<(EmbeddingResult, MetricSpace, f64)> {
    let emb = frt_embed(space, &rand.derive("frt"))?;
    let raw = emb.tree_space();
    let unit = raw.min_dist();
    Ok((emb, raw.normalize()?, unit))
}

pub fn general_alice(
    space: &MetricSpace,
    x: &[Point],
    alpha: u32,
    cfg: &ProtocolConfig,
    rand: &SharedRandomness,
) -> Result<TopBody> {
    if f64::from(alpha) < general_min_alpha(space, cfg.c_emb) {
        return Ok(verbatim(space, x));
    }
    let alpha_tree = (f64::from(alpha) / (cfg.c_emb * (space.size() as f64).log2())).floor() as u32;
    let (emb, tree, _) = embed(space, rand)?;
    let inner = tree_alice(&tree, &emb.map(x), alpha_tree, cfg, rand)?;
    Ok(TopBody::Embedded { alpha_tree, inner: Box::new(inner) })
}

/// Whether the separable route runs the ladder rather than sending `x`.
pub fn separable_engaged(alpha: u32, params: &PartitionParams) -> bool {
    params.raw_alpha((alpha / 2).max(1)) >= 1.0 - 1e-9
}

pub fn separable_params(space: &MetricSpace, cfg: &ProtocolConfig) -> PartitionParams {
    PartitionParams { c1: cfg.c1, factor: cfg.partition_factor, sigma: declared_sigma(space) }
}

pub fn separable_alice(
    space: &MetricSpace,
    x: &[Point],
    alpha: u32,
    cfg: &ProtocolConfig,
    rand: &SharedRandomness,
) -> Result<TopBody> {
    let params = separable_params(space, cfg);
    if !separable_engaged(alpha, &params) {
        return Ok(verbatim(space, x));
    }
    let search = cfg.search.unwrap_or(Search::Binary);
    let msg = ladder::alice(space, x, alpha, cfg.delta, GapKind::Partition(params), search, rand, cfg.backend)?;
    Ok(TopBody::Ladder(msg))
}

/// Bob's side for every route.
pub fn bob(space: &MetricSpace, body: &TopBody, y: &[Point], rand: &SharedRandomness) -> Result<ProtocolOutcome> {
    Ok(bob_detailed(space, body, y, rand)?.0)
}

/// Outcome plus the ladder rung it came from, if any.
pub fn bob_detailed(
    space: &MetricSpace,
    body: &TopBody,
    y: &[Point],
    rand: &SharedRandomness,
) -> Result<(ProtocolOutcome, Option<usize>)> {
    match body {
        TopBody::Verbatim { letters: x, .. } => {
            space.check_sequence(x).map_err(|e| Error::Wire(e.to_string()))?;
            space.check_sequence(y)?;
            Ok((ProtocolOutcome::Estimate(dtw_unchecked(space, x, y)), None))
        }
        TopBody::Ladder(m) => {
            let rep = ladder::bob_detailed(space, m, y, rand)?;
            Ok((rep.outcome, rep.rung))
        }
        TopBody::Embedded { inner, .. } => {
            space.check_sequence(y)?;
            let (emb, tree, unit) = embed(space, rand)?;
            let (out, rung) = bob_detailed(&tree, inner, &emb.map(y), rand)?;
            Ok((out.scaled(unit), rung))
        }
    }
}

impl TopBody {
    pub fn bits(&self) -> u64 {
        1 + match self {
            TopBody::Verbatim { width, letters } => 8 + letters.len() as u64 * u64::from(*width),
            TopBody::Ladder(m) => m.bits(),
            TopBody::Embedded { inner, .. } => 16 + inner.bits(),
        }
    }

    pub fn write(&self, w: &mut BitWriter) {
        match self {
            TopBody::Verbatim { width, letters } => {
                w.write_bool(false);
                w.write(u64::from(*width), 8);
                for &l in letters {
                    w.write(u64::from(l), *width);
                }
            }
            TopBody::Ladder(m) => {
                w.write_bool(true);
                m.write(w);
            }
            TopBody::Embedded { alpha_tree, inner } => {
                w.write_bool(true);
                w.write(u64::from(*alpha_tree), 16);
                inner.write(w);
            }
        }
    }

    pub fn read(r: &mut BitReader, n: usize, embedded: bool) -> Result<Self> {
        if !r.read_bool()? {
            let width = r.read(8)? as u32;
            if width == 0 || width > 32 {
                return Err(Error::Wire(format!("letter width {width}")));
            }
            let letters = (0..n).map(|_| Ok(r.read(width)? as Point)).collect::<Result<Vec<_>>>()?;
            return Ok(TopBody::Verbatim { width, letters });
        }
        if embedded {
            let alpha_tree = r.read(16)? as u32;
            let inner = TopBody::read(r, n, false)?;
            return Ok(TopBody::Embedded { alpha_tree, inner: Box::new(inner) });
        }
        Ok(TopBody::Ladder(LadderMessage::read(r, n)?))
    }
}
