//! One-way protocols. Alice builds a [`Message`] from `x` alone; Bob answers
//! from the message, the metric space and `y`.
//!
//! A serialized message is a 128-bit header (16-bit protocol id, 32-bit
//! `|x|`, 16-bit α, 64-bit seed id) followed by the protocol body. The
//! framing length prefix is not counted in [`Message::bits`].

pub mod bounded;
pub mod gap;
pub mod ladder;
pub mod top;

use std::fmt;
use std::str::FromStr;

use crate::doc_exchange::Backend;
use crate::error::{Error, Result};
use crate::metric::{MetricSpace, Point};
use crate::randomness::SharedRandomness;
use crate::wire::{BitReader, BitWriter};

pub use bounded::BoundedMessage;
pub use gap::{PartitionGapMessage, PartitionParams, TreeGapMessage};
pub use ladder::{GapKind, LadderMessage, LadderReport, Search};
pub use top::TopBody;

pub const HEADER_BITS: u64 = 16 + 32 + 16 + 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProtocolOutcome {
    Estimate(f64),
    GapBit(u8),
    Fail,
}

impl ProtocolOutcome {
    pub fn estimate(&self) -> Option<f64> {
        match self {
            ProtocolOutcome::Estimate(t) => Some(*t),
            _ => None,
        }
    }

    pub(crate) fn scaled(self, factor: f64) -> Self {
        match self {
            ProtocolOutcome::Estimate(t) => ProtocolOutcome::Estimate(t * factor),
            other => other,
        }
    }
}

impl fmt::Display for ProtocolOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProtocolOutcome::Estimate(t) => write!(f, "estimate {t}"),
            ProtocolOutcome::GapBit(b) => write!(f, "gap {b}"),
            ProtocolOutcome::Fail => write!(f, "fail"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Protocol {
    Empty,
    Bounded,
    /// Gap protocols take `r` in the units of the caller's space.
    GapTree { r: f64 },
    GapPartition { r: f64 },
    AdtwTree,
    AdtwGeneral,
    AdtwSeparable,
}

impl Protocol {
    pub const NAMES: [&'static str; 6] =
        ["bounded", "gap-tree", "gap-partition", "adtw-tree", "adtw-general", "adtw-separable"];

    pub fn id(&self) -> u16 {
        match self {
            Protocol::Empty => 0,
            Protocol::Bounded => 1,
            Protocol::GapTree { .. } => 2,
            Protocol::GapPartition { .. } => 3,
            Protocol::AdtwTree => 4,
            Protocol::AdtwGeneral => 5,
            Protocol::AdtwSeparable => 6,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Protocol::Empty => "empty",
            Protocol::Bounded => "bounded",
            Protocol::GapTree { .. } => "gap-tree",
            Protocol::GapPartition { .. } => "gap-partition",
            Protocol::AdtwTree => "adtw-tree",
            Protocol::AdtwGeneral => "adtw-general",
            Protocol::AdtwSeparable => "adtw-separable",
        }
    }

    /// Parses a protocol name; gap protocols need `r`.
    pub fn parse(name: &str, r: Option<f64>) -> Result<Self> {
        let need_r = || r.ok_or_else(|| Error::InvalidParameter(format!("{name} needs a threshold r")));
        Ok(match name {
            "empty" => Protocol::Empty,
            "bounded" => Protocol::Bounded,
            "gap-tree" => Protocol::GapTree { r: need_r()? },
            "gap-partition" => Protocol::GapPartition { r: need_r()? },
            "adtw-tree" => Protocol::AdtwTree,
            "adtw-general" => Protocol::AdtwGeneral,
            "adtw-separable" => Protocol::AdtwSeparable,
            _ => return Err(Error::Parse(format!("unknown protocol '{name}'"))),
        })
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Protocol::parse(s, None)
    }
}

/// Alice-side settings. Bob needs none of them: messages are self-describing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolConfig {
    pub delta: f64,
    pub backend: Backend,
    /// Ladder search mode; `None` picks linear for trees and binary for partitions.
    pub search: Option<Search>,
    pub c1: f64,
    pub partition_factor: f64,
    /// Embedding allowance: the general route needs `α >= 2·c_emb·log₂|Σ|`.
    pub c_emb: f64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            delta: 0.05,
            backend: Backend::Auto,
            search: None,
            c1: gap::DEFAULT_C1,
            partition_factor: gap::DEFAULT_PARTITION_FACTOR,
            c_emb: 10.0 * crate::decompositions::C_FRT,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Body {
    Empty,
    Bounded(BoundedMessage),
    GapTree(TreeGapMessage),
    GapPartition(PartitionGapMessage),
    Top(TopBody),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub protocol_id: u16,
    /// Length of Alice's string.
    pub n: usize,
    pub alpha: u32,
    pub seed_id: u64,
    body: Body,
}

fn normalized(space: &MetricSpace) -> Result<(MetricSpace, f64)> {
    let unit = space.min_dist();
    Ok((space.normalize()?, unit))
}

fn check_alpha(alpha: u32) -> Result<()> {
    if alpha == 0 || alpha > u32::from(u16::MAX) {
        return Err(Error::InvalidParameter(format!("α must lie in 1..=65535, got {alpha}")));
    }
    Ok(())
}

/// Alice's half. For [`Protocol::Bounded`], α above `|x|` is clamped to `|x|`.
pub fn sketch(
    space: &MetricSpace,
    x: &[Point],
    protocol: Protocol,
    alpha: u32,
    cfg: &ProtocolConfig,
    rand: &SharedRandomness,
) -> Result<Message> {
    if protocol == Protocol::Empty {
        return Ok(Message::empty(rand));
    }
    check_alpha(alpha)?;
    if x.is_empty() {
        return Err(Error::EmptySequence);
    }
    if u32::try_from(x.len()).is_err() {
        return Err(Error::InvalidParameter("sequence too long".into()));
    }
    space.check_sequence(x)?;
    let (space, unit) = normalized(space)?;
    let n = x.len();
    let body = match protocol {
        Protocol::Empty => unreachable!(),
        Protocol::Bounded => {
            let a = alpha.min(n as u32);
            Body::Bounded(bounded::alice(&space, x, a, cfg.delta, &rand.derive("bounded"), cfg.backend)?)
        }
        Protocol::GapTree { r } => {
            Body::GapTree(gap::tree_alice(&space, x, r / unit, alpha, cfg.delta, rand, cfg.backend)?)
        }
        Protocol::GapPartition { r } => {
            let params = top::separable_params(&space, cfg);
            Body::GapPartition(gap::partition_alice(&space, x, r / unit, alpha, cfg.delta, params, rand, cfg.backend)?)
        }
        Protocol::AdtwTree => Body::Top(top::tree_alice(&space, x, alpha, cfg, rand)?),
        Protocol::AdtwGeneral => Body::Top(top::general_alice(&space, x, alpha, cfg, rand)?),
        Protocol::AdtwSeparable => Body::Top(top::separable_alice(&space, x, alpha, cfg, rand)?),
    };
    Ok(Message { protocol_id: protocol.id(), n, alpha, seed_id: rand.id(), body })
}

/// Bob's half: the outcome and, for ladder protocols, the rung it came from.
pub fn estimate_detailed(
    space: &MetricSpace,
    msg: &Message,
    y: &[Point],
    rand: &SharedRandomness,
) -> Result<(ProtocolOutcome, Option<usize>)> {
    if rand.id() != msg.seed_id {
        return Err(Error::Precondition("message was built from different shared randomness".into()));
    }
    if y.is_empty() {
        return Err(Error::EmptySequence);
    }
    space.check_sequence(y)?;
    let (space, unit) = normalized(space)?;
    Ok(match &msg.body {
        Body::Empty => return Err(Error::Precondition("the empty message carries no protocol".into())),
        Body::Bounded(m) => (bounded::bob(&space, m, y, &rand.derive("bounded"))?.scaled(unit), None),
        Body::GapTree(m) => (ProtocolOutcome::GapBit(gap::tree_bob(&space, m, y, rand)?), None),
        Body::GapPartition(m) => (ProtocolOutcome::GapBit(gap::partition_bob(&space, m, y, rand)?), None),
        Body::Top(b) => {
            let (out, rung) = top::bob_detailed(&space, b, y, rand)?;
            (out.scaled(unit), rung)
        }
    })
}

pub fn estimate(space: &MetricSpace, msg: &Message, y: &[Point], rand: &SharedRandomness) -> Result<ProtocolOutcome> {
    Ok(estimate_detailed(space, msg, y, rand)?.0)
}

/// Exact serialized size of `msg` in bits, header included.
pub fn message_bits(msg: &Message) -> u64 {
    msg.bits()
}

impl Message {
    /// A message carrying only the header.
    pub fn empty(rand: &SharedRandomness) -> Self {
        Message { protocol_id: 0, n: 0, alpha: 0, seed_id: rand.id(), body: Body::Empty }
    }

    pub fn protocol_name(&self) -> &'static str {
        match self.protocol_id {
            0 => "empty",
            1..=6 => Protocol::NAMES[self.protocol_id as usize - 1],
            _ => "unknown",
        }
    }

    pub fn bits(&self) -> u64 {
        HEADER_BITS
            + match &self.body {
                Body::Empty => 0,
                Body::Bounded(m) => m.bits(),
                Body::GapTree(m) => m.bits(),
                Body::GapPartition(m) => m.bits(),
                Body::Top(b) => b.bits(),
            }
    }

    pub fn bounded(&self) -> Option<&BoundedMessage> {
        match &self.body {
            Body::Bounded(m) => Some(m),
            _ => None,
        }
    }

    pub fn top(&self) -> Option<&TopBody> {
        match &self.body {
            Body::Top(b) => Some(b),
            _ => None,
        }
    }

    pub fn write(&self, w: &mut BitWriter) {
        w.write(u64::from(self.protocol_id), 16);
        w.write(self.n as u64, 32);
        w.write(u64::from(self.alpha), 16);
        w.write(self.seed_id, 64);
        match &self.body {
            Body::Empty => {}
            Body::Bounded(m) => m.write(w),
            Body::GapTree(m) => m.write(w),
            Body::GapPartition(m) => m.write(w),
            Body::Top(b) => b.write(w),
        }
    }

    pub fn read(r: &mut BitReader) -> Result<Self> {
        let protocol_id = r.read(16)? as u16;
        let n = r.read(32)? as usize;
        let alpha = r.read(16)? as u32;
        let seed_id = r.read(64)?;
        let body = match protocol_id {
            0 => Body::Empty,
            1 => Body::Bounded(BoundedMessage::read(r, n)?),
            2 => Body::GapTree(TreeGapMessage::read(r, n)?),
            3 => Body::GapPartition(PartitionGapMessage::read(r, n)?),
            4 | 6 => Body::Top(TopBody::read(r, n, false)?),
            5 => Body::Top(TopBody::read(r, n, true)?),
            id => return Err(Error::Wire(format!("unknown protocol id {id}"))),
        };
        Ok(Message { protocol_id, n, alpha, seed_id, body })
    }

    /// Framed byte encoding: 64-bit big-endian bit count, then the bits.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = BitWriter::new();
        self.write(&mut w);
        w.into_framed()
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self> {
        let mut r = BitReader::from_framed(data)?;
        let msg = Message::read(&mut r)?;
        r.finish()?;
        Ok(msg)
    }
}
