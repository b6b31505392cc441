//! Bounded α-DTW: exact up to factor α whenever `dtw0(x, y) <= n/α`,
//! otherwise possibly Fail.
//!
//! Alice sends the long runs of `x` and a document-exchange sketch of
//! `collapse(x)` with budget `K = 3⌈n/α⌉`. Bob recovers `collapse(x)`,
//! re-extends the long runs to obtain `x′` and answers `α·dtw(x′, y)`.

use super::ProtocolOutcome;
use crate::doc_exchange::{de_recover, de_sketch, Backend, DeMessage, Recovery};
use crate::dtw::{collapse, dtw_unchecked, heavy_hitter_list, reconstruct_light, HeavyHitterList};
use crate::error::{Error, Result};
use crate::metric::{MetricSpace, Point};
use crate::randomness::SharedRandomness;
use crate::wire::{width_for, BitReader, BitWriter};

#[derive(Debug, Clone, PartialEq)]
pub struct BoundedMessage {
    pub alpha: u32,
    pub n: usize,
    pub heavy: HeavyHitterList,
    pub sketch: DeMessage,
}

/// Document-exchange budget for length `n` at approximation `alpha`.
pub fn budget(n: usize, alpha: u32) -> usize {
    3 * n.div_ceil(alpha as usize)
}

pub fn alice(
    space: &MetricSpace,
    x: &[Point],
    alpha: u32,
    delta: f64,
    rand: &SharedRandomness,
    backend: Backend,
) -> Result<BoundedMessage> {
    let n = x.len();
    if n == 0 {
        return Err(Error::EmptySequence);
    }
    if alpha == 0 || alpha as usize > n || alpha > u32::from(u16::MAX) {
        return Err(Error::Precondition(format!("bounded protocol needs 1 <= α <= n, got α={alpha}, n={n}")));
    }
    space.check_sequence(x)?;
    let heavy = heavy_hitter_list(x, alpha as usize);
    let sketch = de_sketch(&collapse(x), budget(n, alpha), delta, space.size() as u32, rand, backend)?;
    Ok(BoundedMessage { alpha, n, heavy, sketch })
}

/// Bob's answer, plus the recovered `x′` when recovery succeeded.
pub fn bob_detailed(
    space: &MetricSpace,
    msg: &BoundedMessage,
    y: &[Point],
    rand: &SharedRandomness,
) -> Result<(ProtocolOutcome, Option<Vec<Point>>)> {
    if y.is_empty() {
        return Err(Error::EmptySequence);
    }
    space.check_sequence(y)?;
    let collapsed = match de_recover(&msg.sketch, &collapse(y), rand)? {
        Recovery::Recovered(c) => c,
        Recovery::Fail => return Ok((ProtocolOutcome::Fail, None)),
    };
    // A recovered string inconsistent with the run list can only come from a
    // fingerprint collision; treat it as a failed recovery.
    let Ok(light) = reconstruct_light(&collapsed, &msg.heavy) else {
        return Ok((ProtocolOutcome::Fail, None));
    };
    if light.is_empty() {
        return Ok((ProtocolOutcome::Fail, None));
    }
    let t = f64::from(msg.alpha) * dtw_unchecked(space, &light, y);
    Ok((ProtocolOutcome::Estimate(t), Some(light)))
}

pub fn bob(space: &MetricSpace, msg: &BoundedMessage, y: &[Point], rand: &SharedRandomness) -> Result<ProtocolOutcome> {
    Ok(bob_detailed(space, msg, y, rand)?.0)
}

impl BoundedMessage {
    fn entry_width(&self) -> u32 {
        width_for(self.n as u64)
    }

    pub fn bits(&self) -> u64 {
        16 + u64::from(width_for(self.n as u64))
            + self.heavy.len() as u64 * 2 * u64::from(self.entry_width())
            + self.sketch.bits()
    }

    /// Serializes everything except `n`, which the enclosing header carries.
    pub fn write(&self, w: &mut BitWriter) {
        w.write(u64::from(self.alpha), 16);
        w.write(self.heavy.len() as u64, width_for(self.n as u64));
        let width = self.entry_width();
        for &(i, l) in &self.heavy.entries {
            w.write(i as u64, width);
            w.write(l as u64, width);
        }
        self.sketch.write(w);
    }

    pub fn read(r: &mut BitReader, n: usize) -> Result<Self> {
        let alpha = r.read(16)? as u32;
        let count = r.read(width_for(n as u64))? as usize;
        let width = width_for(n as u64);
        let entries = (0..count)
            .map(|_| Ok((r.read(width)? as usize, r.read(width)? as usize)))
            .collect::<Result<Vec<_>>>()?;
        let sketch = DeMessage::read(r)?;
        Ok(BoundedMessage { alpha, n, heavy: HeavyHitterList { entries }, sketch })
    }
}
