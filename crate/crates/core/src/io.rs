//! Sequence files.
//!
//! One sequence per line, letters as non-negative integers separated by
//! whitespace or commas. A line may start with a `label:` prefix. Text after
//! `#` is a comment; blank lines are ignored.
//!
//! ```text
//! # expect: dtw <= 1
//! x: 0 0 1 2 2
//! y: 0 1 2
//! ```

use crate::error::{Error, Result};
use crate::metric::Point;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledSequence {
    pub label: Option<String>,
    pub letters: Vec<Point>,
}

pub fn parse_sequences(text: &str) -> Result<Vec<LabeledSequence>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (label, body) = match line.split_once(':') {
            Some((l, b)) => (Some(l.trim().to_string()), b),
            None => (None, line),
        };
        let letters = body
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<Point>()
                    .map_err(|_| Error::Parse(format!("line {}: bad letter '{t}'", lineno + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        if letters.is_empty() {
            return Err(Error::Parse(format!("line {}: empty sequence", lineno + 1)));
        }
        out.push(LabeledSequence { label, letters });
    }
    Ok(out)
}

/// The single sequence in `text`.
pub fn parse_sequence(text: &str) -> Result<Vec<Point>> {
    let mut seqs = parse_sequences(text)?;
    match seqs.len() {
        1 => Ok(seqs.pop().unwrap().letters),
        0 => Err(Error::EmptySequence),
        k => Err(Error::Parse(format!("expected one sequence, found {k}"))),
    }
}

pub fn format_sequence(label: Option<&str>, letters: &[Point]) -> String {
    let body = letters.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" ");
    match label {
        Some(l) => format!("{l}: {body}\n"),
        None => format!("{body}\n"),
    }
}
