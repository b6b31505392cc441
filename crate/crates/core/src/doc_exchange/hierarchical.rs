//! Syndrome-based document exchange over a binary block hierarchy.
//!
//! Level 0 is the whole string; each block of length at least two splits at
//! its midpoint. A block's symbol is its letter plus one for length-one
//! blocks and a Karp-Rabin hash otherwise. Small levels are sent verbatim;
//! larger levels send `2K` power sums `S_k = Σ_j s_j·(j+1)^k`, from which
//! Bob recovers up to `2K` erased symbols. Blocks whose symbol he learns are
//! looked up among the windows of `y`; children of blocks he cannot place
//! become the erasures of the next level.

use std::collections::HashMap;

use rand::Rng;

use super::enumerate::LinearFingerprint;
use super::Recovery;
use crate::dtw::edit_distance;
use crate::error::{Error, Result};
use crate::field;
use crate::metric::Point;
use crate::randomness::SharedRandomness;
use crate::wire::{BitReader, BitWriter};

const SYMBOL_BITS: u32 = 61;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(super) struct Sketch {
    levels: Vec<Vec<u64>>,
    check_bits: u32,
    check: Vec<u64>,
}

type Block = (usize, usize);

fn block_levels(n: usize) -> Vec<Vec<Block>> {
    let mut levels = Vec::new();
    let mut cur: Vec<Block> = if n > 0 { vec![(0, n)] } else { vec![] };
    while !cur.is_empty() {
        let next = cur
            .iter()
            .filter(|&&(_, len)| len >= 2)
            .flat_map(|&(s, len)| [(s, len / 2), (s + len / 2, len - len / 2)])
            .collect();
        levels.push(cur);
        cur = next;
    }
    levels
}

fn is_raw(level: usize, blocks: usize, k: usize) -> bool {
    level == 0 || blocks <= (2 * k).max(1)
}

fn check_bits(delta: f64) -> u32 {
    ((1.0 / delta).log2().ceil() as u32).max(1)
}

struct Hasher {
    base: u64,
}

impl Hasher {
    fn new(rand: &SharedRandomness) -> Self {
        Hasher { base: rand.derive("de:kr").rng().random_range(2..field::P) }
    }

    fn symbol(&self, x: &[Point]) -> u64 {
        if x.len() == 1 {
            return u64::from(x[0]) + 1;
        }
        x.iter().fold(0, |h, &l| field::add(field::mul(h, self.base), u64::from(l) + 1))
    }

    /// Map from window hash to the first start position, for windows of `len >= 2`.
    fn windows(&self, y: &[Point], len: usize) -> HashMap<u64, usize> {
        let mut out = HashMap::new();
        if len > y.len() {
            return out;
        }
        let top = field::pow(self.base, len as u64 - 1);
        let mut h = self.symbol(&y[..len]);
        out.insert(h, 0);
        for s in 1..=y.len() - len {
            h = field::sub(h, field::mul(top, u64::from(y[s - 1]) + 1));
            h = field::add(field::mul(h, self.base), u64::from(y[s + len - 1]) + 1);
            out.entry(h).or_insert(s);
        }
        out
    }
}

fn syndromes(symbols: &[u64], count: usize) -> Vec<u64> {
    let mut out = vec![0u64; count];
    for (j, &s) in symbols.iter().enumerate() {
        let beta = j as u64 + 1;
        let mut term = s;
        for slot in out.iter_mut() {
            *slot = field::add(*slot, term);
            term = field::mul(term, beta);
        }
    }
    out
}

pub(super) fn sketch(x: &[Point], k: usize, delta: f64, rand: &SharedRandomness) -> Sketch {
    let hasher = Hasher::new(rand);
    let levels = block_levels(x.len())
        .iter()
        .enumerate()
        .map(|(l, blocks)| {
            let symbols: Vec<u64> = blocks.iter().map(|&(s, len)| hasher.symbol(&x[s..s + len])).collect();
            if is_raw(l, blocks.len(), k) {
                symbols
            } else {
                syndromes(&symbols, 2 * k)
            }
        })
        .collect();
    let check_bits = check_bits(delta);
    let check = LinearFingerprint::new(&rand.derive("de:verify"), check_bits, x.len()).hash(x);
    Sketch { levels, check_bits, check }
}

/// Solves `Σ_{j∈E} s_j·β_j^k = t_k` for `k < |E|` (transposed Vandermonde).
fn solve_erasures(betas: &[u64], t: &[u64]) -> Vec<u64> {
    let e = betas.len();
    // master(z) = Π (z − β_i), coefficients lowest degree first
    let mut master = vec![1u64];
    for &b in betas {
        let mut next = vec![0u64; master.len() + 1];
        for (d, &c) in master.iter().enumerate() {
            next[d + 1] = field::add(next[d + 1], c);
            next[d] = field::sub(next[d], field::mul(c, b));
        }
        master = next;
    }
    betas
        .iter()
        .map(|&bj| {
            // quotient(z) = master(z) / (z − β_j) by synthetic division
            let mut q = vec![0u64; e];
            let mut carry = 0u64;
            for d in (1..=e).rev() {
                carry = field::add(master[d], field::mul(carry, bj));
                q[d - 1] = carry;
            }
            let denom = q.iter().rev().fold(0u64, |acc, &c| field::add(field::mul(acc, bj), c));
            let num = q.iter().zip(t).fold(0u64, |acc, (&c, &tk)| field::add(acc, field::mul(c, tk)));
            field::mul(num, field::inv(denom))
        })
        .collect()
}

pub(super) fn recover(
    sk: &Sketch,
    n: usize,
    k: usize,
    alphabet: u32,
    y: &[Point],
    rand: &SharedRandomness,
) -> Recovery {
    let hasher = Hasher::new(rand);
    let levels = block_levels(n);
    let mut xs: Vec<Option<Point>> = vec![None; n];
    let mut window_cache: HashMap<usize, HashMap<u64, usize>> = HashMap::new();
    let mut placed_prev: Vec<bool> = Vec::new();

    for (l, blocks) in levels.iter().enumerate() {
        // A block is known when its parent was placed.
        let mut known = vec![false; blocks.len()];
        if l > 0 {
            let mut child = 0;
            for (p, &(_, len)) in levels[l - 1].iter().enumerate() {
                if len >= 2 {
                    known[child] = placed_prev[p];
                    known[child + 1] = placed_prev[p];
                    child += 2;
                }
            }
        }
        let data = &sk.levels[l];
        let symbols: Vec<Option<u64>> = if is_raw(l, blocks.len(), k) {
            data.iter().map(|&s| Some(s)).collect()
        } else {
            let mut t = data.clone();
            let mut erased = Vec::new();
            let mut filled: Vec<Option<u64>> = vec![None; blocks.len()];
            for (j, &(s, len)) in blocks.iter().enumerate() {
                if known[j] {
                    let content: Vec<Point> = xs[s..s + len].iter().map(|c| c.unwrap()).collect();
                    let sym = hasher.symbol(&content);
                    filled[j] = Some(sym);
                    let beta = j as u64 + 1;
                    let mut pw = 1u64;
                    for slot in t.iter_mut() {
                        *slot = field::sub(*slot, field::mul(sym, pw));
                        pw = field::mul(pw, beta);
                    }
                } else {
                    erased.push(j);
                }
            }
            if erased.len() > t.len() {
                return Recovery::Fail;
            }
            let betas: Vec<u64> = erased.iter().map(|&j| j as u64 + 1).collect();
            let values = solve_erasures(&betas, &t[..erased.len()]);
            // Remaining syndromes must agree with the solution.
            for (kk, &tk) in t.iter().enumerate().skip(erased.len()) {
                let v = betas
                    .iter()
                    .zip(&values)
                    .fold(0u64, |acc, (&b, &s)| field::add(acc, field::mul(s, field::pow(b, kk as u64))));
                if v != tk {
                    return Recovery::Fail;
                }
            }
            for (&j, &v) in erased.iter().zip(&values) {
                filled[j] = Some(v);
            }
            filled
        };

        let mut placed = vec![false; blocks.len()];
        for (j, &(s, len)) in blocks.iter().enumerate() {
            if known[j] {
                placed[j] = true;
                continue;
            }
            let Some(sym) = symbols[j] else { continue };
            if len == 1 {
                if sym >= 1 && sym - 1 < u64::from(alphabet) {
                    xs[s] = Some((sym - 1) as Point);
                    placed[j] = true;
                }
                continue;
            }
            let table = window_cache.entry(len).or_insert_with(|| hasher.windows(y, len));
            if let Some(&ys) = table.get(&sym) {
                for (slot, &l) in xs[s..s + len].iter_mut().zip(&y[ys..ys + len]) {
                    *slot = Some(l);
                }
                placed[j] = true;
            }
        }
        placed_prev = placed;
    }

    let Some(candidate) = xs.into_iter().collect::<Option<Vec<Point>>>() else {
        return Recovery::Fail;
    };
    let fp = LinearFingerprint::new(&rand.derive("de:verify"), sk.check_bits, n);
    if fp.hash(&candidate) != sk.check || edit_distance(&candidate, y) > k {
        return Recovery::Fail;
    }
    Recovery::Recovered(candidate)
}

impl Sketch {
    pub(super) fn bits(&self) -> u64 {
        let symbols: usize = self.levels.iter().map(Vec::len).sum();
        symbols as u64 * u64::from(SYMBOL_BITS) + 16 + u64::from(self.check_bits)
    }

    pub(super) fn write(&self, w: &mut BitWriter) {
        for level in &self.levels {
            for &s in level {
                w.write(s, SYMBOL_BITS);
            }
        }
        w.write(u64::from(self.check_bits), 16);
        for (i, &c) in self.check.iter().enumerate() {
            w.write(c, super::enumerate::word_width(self.check_bits, i));
        }
    }

    pub(super) fn read(r: &mut BitReader, n: usize, k: usize) -> Result<Self> {
        let levels = block_levels(n)
            .iter()
            .enumerate()
            .map(|(l, blocks)| {
                let count = if is_raw(l, blocks.len(), k) { blocks.len() } else { 2 * k };
                (0..count).map(|_| r.read(SYMBOL_BITS)).collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let check_bits = r.read(16)? as u32;
        if check_bits == 0 {
            return Err(Error::Wire("empty verification fingerprint".into()));
        }
        let check = (0..super::enumerate::word_count(check_bits))
            .map(|i| r.read(super::enumerate::word_width(check_bits, i)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Sketch { levels, check_bits, check })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hierarchy_shape() {
        let levels = block_levels(5);
        assert_eq!(levels[0], vec![(0, 5)]);
        assert_eq!(levels[1], vec![(0, 2), (2, 3)]);
        assert_eq!(levels[2], vec![(0, 1), (1, 1), (2, 1), (3, 2)]);
        assert_eq!(levels[3], vec![(3, 1), (4, 1)]);
        assert_eq!(levels.len(), 4);
        assert!(block_levels(0).is_empty());
    }

    #[test]
    fn erasure_solver_inverts_power_sums() {
        let symbols = [5u64, 77, 1 << 50, 3, 9, 12];
        let s = syndromes(&symbols, 6);
        let betas: Vec<u64> = (1..=6).collect();
        assert_eq!(solve_erasures(&betas, &s), symbols.to_vec());
    }

    #[test]
    fn rolling_windows_match_direct_hash() {
        let h = Hasher::new(&SharedRandomness::new(4));
        let y = [3, 1, 4, 1, 5, 9, 2, 6];
        let table = h.windows(&y, 3);
        for s in 0..6 {
            assert_eq!(table[&h.symbol(&y[s..s + 3])], s);
        }
    }
}
