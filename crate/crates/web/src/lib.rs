//! Browser bindings for the demo page in `www/`.
//!
//! Every exported function takes plain strings and numbers and returns a
//! JSON document; errors surface as JavaScript exceptions.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use dtw_sketch::decompositions::sample_partition;
use dtw_sketch::dtw::{dtw, dtw0, edit_distance, optimal_correspondence};
use dtw_sketch::harness::MetricSpec;
use dtw_sketch::io::parse_sequence;
use dtw_sketch::protocols::{self, Protocol, ProtocolConfig, ProtocolOutcome};
use dtw_sketch::{MetricSpace, Point, SharedRandomness};

#[derive(Serialize)]
pub struct Alignment {
    pub dtw: f64,
    pub dtw0: u64,
    pub edit_distance: usize,
    pub path: Vec<(usize, usize)>,
}

#[derive(Serialize)]
pub struct SweepRow {
    pub alpha: u32,
    pub bits: u64,
    pub outcome: String,
    pub estimate: Option<f64>,
    pub ratio: Option<f64>,
}

#[derive(Serialize)]
pub struct Sweep {
    pub n: usize,
    pub dtw: f64,
    pub verbatim_bits: u64,
    pub rows: Vec<SweepRow>,
}

#[derive(Serialize)]
pub struct PartitionView {
    pub parts: Vec<u32>,
    pub representatives: Vec<Point>,
    pub num_parts: usize,
    pub max_diameter: f64,
}

/// `line`/`hamming` without a size take it from the sequences.
fn metric(spec: &str, seed: u64, seqs: &[&[Point]]) -> Result<MetricSpace, String> {
    let inferred = || seqs.iter().flat_map(|s| s.iter()).copied().max().unwrap_or(0).max(1) + 1;
    let space = match spec.trim() {
        "line" => MetricSpace::integer_line(inferred()),
        "hamming" => MetricSpace::generalized_hamming(inferred()),
        s => s
            .parse::<MetricSpec>()
            .and_then(|m| m.build(&SharedRandomness::new(seed).derive("metric"))),
    }
    .map_err(|e| e.to_string())?;
    for s in seqs {
        space.check_sequence(s).map_err(|e| e.to_string())?;
    }
    Ok(space)
}

fn seq(text: &str) -> Result<Vec<Point>, String> {
    parse_sequence(text).map_err(|e| e.to_string())
}

pub fn align_impl(x: &str, y: &str, spec: &str) -> Result<Alignment, String> {
    let (x, y) = (seq(x)?, seq(y)?);
    let space = metric(spec, 0, &[&x, &y])?;
    let c = optimal_correspondence(&space, &x, &y).map_err(|e| e.to_string())?;
    Ok(Alignment {
        dtw: dtw(&space, &x, &y).map_err(|e| e.to_string())?,
        dtw0: dtw0(&x, &y).map_err(|e| e.to_string())?,
        edit_distance: edit_distance(&x, &y),
        path: c.path,
    })
}

pub fn bounded_sweep_impl(x: &str, y: &str, spec: &str, seed: u64) -> Result<Sweep, String> {
    let (x, y) = (seq(x)?, seq(y)?);
    let space = metric(spec, seed, &[&x, &y])?;
    let d = dtw(&space, &x, &y).map_err(|e| e.to_string())?;
    let rand = SharedRandomness::new(seed);
    let cfg = ProtocolConfig::default();
    let alphas: Vec<u32> = (0..16).map(|k| 1u32 << k).take_while(|&a| a as usize <= x.len()).collect();
    let mut rows = Vec::new();
    for alpha in alphas {
        let msg = protocols::sketch(&space, &x, Protocol::Bounded, alpha, &cfg, &rand).map_err(|e| e.to_string())?;
        let out = protocols::estimate(&space, &msg, &y, &rand).map_err(|e| e.to_string())?;
        let estimate = out.estimate();
        let ratio = match out {
            ProtocolOutcome::Estimate(t) if d > 0.0 => Some(t / d),
            _ => None,
        };
        rows.push(SweepRow { alpha, bits: msg.bits(), outcome: out.to_string(), estimate, ratio });
    }
    let width = 32 - (space.size().max(2) as u32 - 1).leading_zeros();
    Ok(Sweep { n: x.len(), dtw: d, verbatim_bits: x.len() as u64 * u64::from(width), rows })
}

pub fn partition_impl(spec: &str, delta: f64, seed: u64) -> Result<PartitionView, String> {
    let space = metric(spec, seed, &[])?;
    let p = sample_partition(&space, delta, &SharedRandomness::new(seed).derive("demo-partition"))
        .map_err(|e| e.to_string())?;
    Ok(PartitionView {
        parts: space.points().map(|a| p.part_of(a)).collect(),
        representatives: space.points().map(|a| p.representative(a)).collect(),
        num_parts: p.num_parts(),
        max_diameter: p.max_part_diameter(&space),
    })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

/// Exact DTW, DTW₀, edit distance and an optimal alignment path.
#[wasm_bindgen]
pub fn align(x: &str, y: &str, metric: &str) -> Result<String, JsError> {
    to_js(align_impl(x, y, metric))
}

/// Runs the bounded protocol for every power-of-two α up to `|x|`.
#[wasm_bindgen]
pub fn bounded_sweep(x: &str, y: &str, metric: &str, seed: u32) -> Result<String, JsError> {
    to_js(bounded_sweep_impl(x, y, metric, u64::from(seed)))
}

/// One random partition of diameter at most `delta`.
#[wasm_bindgen]
pub fn partition(metric: &str, delta: f64, seed: u32) -> Result<String, JsError> {
    to_js(partition_impl(metric, delta, u64::from(seed)))
}
