use crate::error::{Error, Result};
use crate::metric::Point;

/// A maximal block of one repeated letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Run {
    pub letter: Point,
    pub start: usize,
    pub len: usize,
}

pub fn runs(x: &[Point]) -> Vec<Run> {
    let mut out: Vec<Run> = Vec::new();
    for (i, &l) in x.iter().enumerate() {
        match out.last_mut() {
            Some(r) if r.letter == l => r.len += 1,
            _ => out.push(Run { letter: l, start: i, len: 1 }),
        }
    }
    out
}

pub fn is_run_free(x: &[Point]) -> bool {
    x.windows(2).all(|w| w[0] != w[1])
}

/// Shrinks every run to a single letter.
pub fn collapse(x: &[Point]) -> Vec<Point> {
    let mut out = x.to_vec();
    out.dedup();
    out
}

/// Shrinks runs shorter than `alpha` to a single letter; longer runs are kept.
pub fn collapse_light(x: &[Point], alpha: usize) -> Vec<Point> {
    let mut out = Vec::with_capacity(x.len());
    for r in runs(x) {
        let keep = if r.len >= alpha { r.len } else { 1 };
        out.extend(std::iter::repeat_n(r.letter, keep));
    }
    out
}

/// Runs of length at least α, as `(run index, run length)` pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HeavyHitterList {
    pub entries: Vec<(usize, usize)>,
}

impl HeavyHitterList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn heavy_hitter_list(x: &[Point], alpha: usize) -> HeavyHitterList {
    let entries = runs(x)
        .iter()
        .enumerate()
        .filter(|(_, r)| r.len >= alpha.max(1))
        .map(|(i, r)| (i, r.len))
        .collect();
    HeavyHitterList { entries }
}

/// Re-extends the runs of a run-free string listed in `hh`.
///
/// `reconstruct_light(&collapse(x), &heavy_hitter_list(x, a)) == collapse_light(x, a)`.
pub fn reconstruct_light(collapsed: &[Point], hh: &HeavyHitterList) -> Result<Vec<Point>> {
    if !is_run_free(collapsed) {
        return Err(Error::Corruption("collapsed string contains a run".into()));
    }
    let mut lens = vec![1usize; collapsed.len()];
    let mut prev: Option<usize> = None;
    for &(i, l) in &hh.entries {
        if i >= collapsed.len() {
            return Err(Error::Corruption(format!(
                "heavy-hitter run index {i} outside a string of {} runs",
                collapsed.len()
            )));
        }
        if prev.is_some_and(|p| p >= i) || l == 0 {
            return Err(Error::Corruption("heavy-hitter list is not strictly increasing".into()));
        }
        prev = Some(i);
        lens[i] = l;
    }
    let mut out = Vec::with_capacity(lens.iter().sum());
    for (&c, &l) in collapsed.iter().zip(&lens) {
        out.extend(std::iter::repeat_n(c, l));
    }
    Ok(out)
}
