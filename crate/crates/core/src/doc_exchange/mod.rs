//! K-document exchange: Alice sends a short sketch of `x`; Bob, holding `y`
//! with `ed(x, y) <= K`, recovers `x` or answers [`Recovery::Fail`].
//!
//! Two backends share one message type:
//!
//! * [`Scheme::Enumeration`] hashes `x` with a random linear fingerprint and
//!   Bob searches the edit-distance-`K` neighborhood of `y` breadth-first.
//!   Sketch size is `O(K log n + log 1/δ)` bits but decoding is exponential
//!   in `K`, so it is limited by a candidate budget.
//! * [`Scheme::Hierarchical`] sends power-sum syndromes of a binary block
//!   hierarchy and decodes in polynomial time, at `O(K log² n)`-ish cost with
//!   a constant of [`HIERARCHICAL_C_DE`].

mod enumerate;
mod hierarchical;

pub use enumerate::{enumeration_fingerprint_bits, LinearFingerprint};

use crate::error::{Error, Result};
use crate::metric::Point;
use crate::randomness::SharedRandomness;
use crate::wire::{BitReader, BitWriter};

/// Default limit on candidates examined by the enumeration decoder.
pub const CANDIDATE_CAP: u64 = 10_000_000;

/// Constant `c` with `sketch bits <= c·(K·log₂ n + log₂(1/δ))` for the
/// enumeration backend when the first term of its size rule dominates.
pub const ENUMERATION_C_DE: f64 = 2.0;

/// Constant `c` with `sketch bits <= c·(K·log₂ n + log₂(1/δ))` for the
/// hierarchical backend (61-bit symbols, `2K` per level, at most
/// `2·log₂ n` levels).
pub const HIERARCHICAL_C_DE: f64 = 244.0;

/// Bits of the fixed sketch header: scheme, K, n, alphabet size, seed id.
pub const DE_HEADER_BITS: u64 = 8 + 32 + 32 + 32 + 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Enumeration = 1,
    Hierarchical = 2,
}

impl Scheme {
    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn from_id(id: u64) -> Result<Self> {
        match id {
            1 => Ok(Scheme::Enumeration),
            2 => Ok(Scheme::Hierarchical),
            other => Err(Error::Wire(format!("unknown document-exchange scheme {other}"))),
        }
    }

    pub fn c_de(self) -> f64 {
        match self {
            Scheme::Enumeration => ENUMERATION_C_DE,
            Scheme::Hierarchical => HIERARCHICAL_C_DE,
        }
    }
}

/// Backend choice made by Alice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    /// Enumeration whenever Bob's neighborhood bound `(3(n+1)|Σ|)^K` fits
    /// within [`CANDIDATE_CAP`], otherwise hierarchical.
    #[default]
    Auto,
    Enumeration,
    Hierarchical,
}

impl Backend {
    pub fn resolve(self, n: usize, k: usize, alphabet: u32) -> Scheme {
        match self {
            Backend::Enumeration => Scheme::Enumeration,
            Backend::Hierarchical => Scheme::Hierarchical,
            Backend::Auto => {
                let per_edit = (3.0 * (n as f64 + 1.0) * f64::from(alphabet.max(1))).log2();
                if k as f64 * per_edit <= (CANDIDATE_CAP as f64).log2() {
                    Scheme::Enumeration
                } else {
                    Scheme::Hierarchical
                }
            }
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Backend::Auto),
            "enumeration" => Ok(Backend::Enumeration),
            "hierarchical" => Ok(Backend::Hierarchical),
            _ => Err(Error::Parse(format!("unknown document-exchange backend '{s}'"))),
        }
    }
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Backend::Auto => "auto",
            Backend::Enumeration => "enumeration",
            Backend::Hierarchical => "hierarchical",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Body {
    Enumeration { fingerprint: Vec<u64>, bits: u32 },
    Hierarchical(hierarchical::Sketch),
}

/// Alice's document-exchange sketch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeMessage {
    pub scheme: Scheme,
    pub k: usize,
    pub n: usize,
    pub alphabet: u32,
    /// Commitment to the shared randomness the sketch was built with.
    pub seed_id: u64,
    body: Body,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Recovery {
    Recovered(Vec<Point>),
    Fail,
}

impl Recovery {
    pub fn recovered(&self) -> Option<&[Point]> {
        match self {
            Recovery::Recovered(x) => Some(x),
            Recovery::Fail => None,
        }
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("δ must lie in (0, 1), got {delta}")));
    }
    Ok(())
}

/// Builds the sketch of `x` for budget `k`; letters must be below `alphabet`.
pub fn de_sketch(
    x: &[Point],
    k: usize,
    delta: f64,
    alphabet: u32,
    rand: &SharedRandomness,
    backend: Backend,
) -> Result<DeMessage> {
    check_delta(delta)?;
    if let Some(&bad) = x.iter().find(|&&l| l >= alphabet) {
        return Err(Error::UnknownPoint(bad));
    }
    if u32::try_from(x.len()).is_err() || u32::try_from(k).is_err() {
        return Err(Error::InvalidParameter("string or budget too large".into()));
    }
    let scheme = backend.resolve(x.len(), k, alphabet);
    let body = match scheme {
        Scheme::Enumeration => {
            let bits = enumeration_fingerprint_bits(x.len(), k, delta, alphabet);
            let fp = LinearFingerprint::new(&rand.derive("de:enum"), bits, x.len());
            Body::Enumeration { fingerprint: fp.hash(x), bits }
        }
        Scheme::Hierarchical => Body::Hierarchical(hierarchical::sketch(x, k, delta, rand)),
    };
    Ok(DeMessage { scheme, k, n: x.len(), alphabet, seed_id: rand.id(), body })
}

/// Bob's side: recovers Alice's string from `msg` and `y`.
///
/// [`Recovery::Fail`] means no string within edit distance `K` of `y`
/// matched. Exhausting the enumeration budget is an error, not a Fail.
pub fn de_recover(msg: &DeMessage, y: &[Point], rand: &SharedRandomness) -> Result<Recovery> {
    de_recover_with_cap(msg, y, rand, CANDIDATE_CAP)
}

pub fn de_recover_with_cap(
    msg: &DeMessage,
    y: &[Point],
    rand: &SharedRandomness,
    cap: u64,
) -> Result<Recovery> {
    if rand.id() != msg.seed_id {
        return Err(Error::Precondition("sketch was built from different shared randomness".into()));
    }
    if let Some(&bad) = y.iter().find(|&&l| l >= msg.alphabet) {
        return Err(Error::UnknownPoint(bad));
    }
    match &msg.body {
        Body::Enumeration { fingerprint, bits } => {
            let fp = LinearFingerprint::new(&rand.derive("de:enum"), *bits, msg.n + msg.k);
            enumerate::recover(fingerprint, &fp, msg.n, msg.k, msg.alphabet, y, cap)
        }
        Body::Hierarchical(s) => Ok(hierarchical::recover(s, msg.n, msg.k, msg.alphabet, y, rand)),
    }
}

impl DeMessage {
    /// Exact serialized size in bits.
    pub fn bits(&self) -> u64 {
        DE_HEADER_BITS
            + match &self.body {
                Body::Enumeration { bits, .. } => 16 + u64::from(*bits),
                Body::Hierarchical(s) => s.bits(),
            }
    }

    /// Bits spent on the fingerprint or syndromes, excluding the header.
    pub fn payload_bits(&self) -> u64 {
        self.bits() - DE_HEADER_BITS
    }

    pub fn write(&self, w: &mut BitWriter) {
        w.write(u64::from(self.scheme.id()), 8);
        w.write(self.k as u64, 32);
        w.write(self.n as u64, 32);
        w.write(u64::from(self.alphabet), 32);
        w.write(self.seed_id, 64);
        match &self.body {
            Body::Enumeration { fingerprint, bits } => {
                w.write(u64::from(*bits), 16);
                for (i, &word) in fingerprint.iter().enumerate() {
                    w.write(word, enumerate::word_width(*bits, i));
                }
            }
            Body::Hierarchical(s) => s.write(w),
        }
    }

    pub fn read(r: &mut BitReader) -> Result<Self> {
        let scheme = Scheme::from_id(r.read(8)?)?;
        let k = r.read(32)? as usize;
        let n = r.read(32)? as usize;
        let alphabet = r.read(32)? as u32;
        let seed_id = r.read(64)?;
        let body = match scheme {
            Scheme::Enumeration => {
                let bits = r.read(16)? as u32;
                if bits == 0 {
                    return Err(Error::Wire("empty fingerprint".into()));
                }
                let words = enumerate::word_count(bits);
                let fingerprint = (0..words)
                    .map(|i| r.read(enumerate::word_width(bits, i)))
                    .collect::<Result<Vec<_>>>()?;
                Body::Enumeration { fingerprint, bits }
            }
            Scheme::Hierarchical => Body::Hierarchical(hierarchical::Sketch::read(r, n, k)?),
        };
        Ok(DeMessage { scheme, k, n, alphabet, seed_id, body })
    }
}
