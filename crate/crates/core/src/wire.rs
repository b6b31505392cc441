//! Bit-granular serialization.
//!
//! Values are written most-significant bit first. A framed message is a
//! 64-bit big-endian bit count followed by the bits padded with zeros to a
//! whole byte.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BitWriter {
    bytes: Vec<u8>,
    bits: u64,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends the low `width` bits of `value` (`width <= 64`).
    pub fn write(&mut self, value: u64, width: u32) {
        debug_assert!(width <= 64);
        debug_assert!(width == 64 || value >> width == 0, "{value} does not fit {width} bits");
        let mut remaining = width;
        while remaining > 0 {
            let used = (self.bits % 8) as u32;
            if used == 0 {
                self.bytes.push(0);
            }
            let take = (8 - used).min(remaining);
            let chunk = ((value >> (remaining - take)) & ((1u64 << take) - 1)) as u8;
            *self.bytes.last_mut().unwrap() |= chunk << (8 - used - take);
            self.bits += u64::from(take);
            remaining -= take;
        }
    }

    pub fn write_bool(&mut self, b: bool) {
        self.write(u64::from(b), 1);
    }

    pub fn write_f64(&mut self, v: f64) {
        self.write(v.to_bits(), 64);
    }

    pub fn bit_len(&self) -> u64 {
        self.bits
    }

    /// Length-prefixed byte encoding.
    pub fn into_framed(self) -> Vec<u8> {
        let mut out = self.bits.to_be_bytes().to_vec();
        out.extend_from_slice(&self.bytes);
        out
    }
}

#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    bits: u64,
    pos: u64,
}

impl<'a> BitReader<'a> {
    /// Reader over a framed message produced by [`BitWriter::into_framed`].
    pub fn from_framed(data: &'a [u8]) -> Result<Self> {
        if data.len() < 8 {
            return Err(Error::Wire("missing length prefix".into()));
        }
        let bits = u64::from_be_bytes(data[..8].try_into().unwrap());
        let body = &data[8..];
        if bits.div_ceil(8) != body.len() as u64 {
            return Err(Error::Wire(format!(
                "prefix announces {bits} bits but {} bytes follow",
                body.len()
            )));
        }
        Ok(BitReader { bytes: body, bits, pos: 0 })
    }

    pub fn read(&mut self, width: u32) -> Result<u64> {
        if self.pos + u64::from(width) > self.bits {
            return Err(Error::Wire(format!(
                "read of {width} bits at offset {} overruns {}-bit message",
                self.pos, self.bits
            )));
        }
        let mut v = 0u64;
        let mut remaining = width;
        while remaining > 0 {
            let used = (self.pos % 8) as u32;
            let take = (8 - used).min(remaining);
            let byte = u64::from(self.bytes[(self.pos / 8) as usize]);
            let chunk = (byte >> (8 - used - take)) & ((1u64 << take) - 1);
            v = if take == 64 { chunk } else { (v << take) | chunk };
            self.pos += u64::from(take);
            remaining -= take;
        }
        Ok(v)
    }

    pub fn read_bool(&mut self) -> Result<bool> {
        Ok(self.read(1)? == 1)
    }

    pub fn read_f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.read(64)?))
    }

    pub fn remaining(&self) -> u64 {
        self.bits - self.pos
    }

    /// Errors unless every bit has been consumed.
    pub fn finish(&self) -> Result<()> {
        if self.remaining() != 0 {
            return Err(Error::Wire(format!("{} trailing bits", self.remaining())));
        }
        Ok(())
    }
}

/// Bits needed to write any value in `0..=max`.
pub fn width_for(max: u64) -> u32 {
    (64 - max.leading_zeros()).max(1)
}
