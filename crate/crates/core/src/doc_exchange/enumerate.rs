use std::collections::HashSet;

use rand::Rng;

use super::Recovery;
use crate::error::{Error, Result};
use crate::field;
use crate::metric::Point;
use crate::randomness::SharedRandomness;

/// Fingerprint length for the enumeration backend.
///
/// The larger of `2·(K·log₂ n + log₂(1/δ))` and the union bound over Bob's
/// neighborhood, `K·log₂(3n|Σ|) + log₂(1/δ)`.
pub fn enumeration_fingerprint_bits(n: usize, k: usize, delta: f64, alphabet: u32) -> u32 {
    let n = n.max(2) as f64;
    let k = k as f64;
    let inv = (1.0 / delta).log2();
    let a = (2.0 * (k * n.log2() + inv)).ceil();
    let b = (k * (3.0 * n * f64::from(alphabet.max(1))).log2() + inv).ceil();
    a.max(b).max(1.0) as u32
}

pub(super) fn word_count(bits: u32) -> usize {
    bits.div_ceil(61) as usize
}

pub(super) fn word_width(bits: u32, i: usize) -> u32 {
    let full = word_count(bits) - 1;
    if i < full {
        61
    } else {
        bits - 61 * full as u32
    }
}

/// `Σ r_i·(x_i + 1) mod 2^61−1` in independent words, the last one truncated.
///
/// Two distinct strings collide in one full word with probability `1/(2^61−1)`.
#[derive(Debug, Clone)]
pub struct LinearFingerprint {
    bits: u32,
    coeffs: Vec<Vec<u64>>,
}

impl LinearFingerprint {
    /// Coefficients for strings of length up to `max_len`. Coefficient
    /// streams are prefix-stable, so sketches built with a shorter `max_len`
    /// agree with hashes computed under a longer one.
    pub fn new(rand: &SharedRandomness, bits: u32, max_len: usize) -> Self {
        let coeffs = (0..word_count(bits))
            .map(|w| {
                let mut rng = rand.derive(&format!("word:{w}")).rng();
                (0..max_len).map(|_| rng.random_range(1..field::P)).collect()
            })
            .collect();
        LinearFingerprint { bits, coeffs }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn hash(&self, x: &[Point]) -> Vec<u64> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(w, r)| {
                assert!(x.len() <= r.len(), "string longer than fingerprint support");
                let h = x.iter().zip(r).fold(0u64, |acc, (&l, &c)| {
                    field::add(acc, field::mul(c, u64::from(l) + 1))
                });
                let width = word_width(self.bits, w);
                if width < 61 {
                    h & ((1u64 << width) - 1)
                } else {
                    h
                }
            })
            .collect()
    }
}

/// Breadth-first search of the edit-distance-`k` neighborhood of `y`.
///
/// Each layer is generated from the previous one by deletions, then
/// substitutions, then insertions, positions left to right and letters
/// ascending. The first candidate whose fingerprint matches is returned.
pub(super) fn recover(
    target: &[u64],
    fp: &LinearFingerprint,
    n: usize,
    k: usize,
    alphabet: u32,
    y: &[Point],
    cap: u64,
) -> Result<Recovery> {
    let matches = |s: &[Point]| s.len() == n && fp.hash(s) == target;
    if matches(y) {
        return Ok(Recovery::Recovered(y.to_vec()));
    }
    let mut seen: HashSet<Vec<Point>> = HashSet::from([y.to_vec()]);
    let mut frontier = vec![y.to_vec()];
    let mut examined: u64 = 1;
    for depth in 1..=k {
        let slack = k - depth;
        let mut next = Vec::new();
        for s in &frontier {
            for t in neighbors(s, alphabet) {
                if t.len().abs_diff(n) > slack || seen.contains(&t) {
                    continue;
                }
                examined += 1;
                if examined > cap {
                    return Err(Error::ResourceExceeded(format!(
                        "edit neighborhood exceeds {cap} candidates"
                    )));
                }
                if matches(&t) {
                    return Ok(Recovery::Recovered(t));
                }
                seen.insert(t.clone());
                next.push(t);
            }
        }
        frontier = next;
    }
    Ok(Recovery::Fail)
}

/// One-edit neighbors of `s`: deletions, substitutions, then insertions.
fn neighbors(s: &[Point], alphabet: u32) -> impl Iterator<Item = Vec<Point>> + '_ {
    let deletions = (0..s.len()).map(move |i| {
        let mut t = s.to_vec();
        t.remove(i);
        t
    });
    let substitutions = (0..s.len()).flat_map(move |i| {
        (0..alphabet).filter(move |&a| a != s[i]).map(move |a| {
            let mut t = s.to_vec();
            t[i] = a;
            t
        })
    });
    let insertions = (0..=s.len()).flat_map(move |i| {
        (0..alphabet).map(move |a| {
            let mut t = Vec::with_capacity(s.len() + 1);
            t.extend_from_slice(&s[..i]);
            t.push(a);
            t.extend_from_slice(&s[i..]);
            t
        })
    });
    deletions.chain(substitutions).chain(insertions)
}
