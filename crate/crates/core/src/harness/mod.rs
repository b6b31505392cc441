//! Experiment runner: draws instances, runs both protocol halves, compares
//! against the exact oracle and reports CSV rows plus a summary.

pub mod instances;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use crate::dtw::dtw_unchecked;
use crate::error::{Error, Result};
use crate::metric::{approx_le, MetricSpace};
use crate::protocols::{self, Protocol, ProtocolConfig, ProtocolOutcome, Search};
use crate::randomness::SharedRandomness;

pub use instances::Distribution;

pub const CSV_VERSION: u32 = 1;
pub const CSV_COLUMNS: &str = "seed,n,alpha,protocol,dtw_true,outcome,estimate,ratio,bits,ms";
/// Exact DTW is computed only when both strings are at most this long.
pub const ORACLE_CAP: usize = 4096;

/// Where the experiment's metric space comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricSpec {
    Line(u32),
    Hamming(u32),
    Grid { dim: u32, p: f64, extent: u32 },
    /// Random well-separated tree with the given number of nodes.
    RandomTree(usize),
    /// Shortest-path metric of a random weighted complete graph.
    RandomMatrix(usize),
    /// Metric file in the text format of [`MetricSpace::parse`].
    File(String),
}

impl FromStr for MetricSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split_whitespace().collect();
        let bad = || Error::Parse(format!("bad metric spec '{s}'"));
        let num = |i: usize| parts.get(i).ok_or_else(bad)?.parse::<u32>().map_err(|_| bad());
        let spec = match parts.first().copied() {
            Some("line") => MetricSpec::Line(num(1)?),
            Some("hamming") => MetricSpec::Hamming(num(1)?),
            Some("grid") => MetricSpec::Grid {
                dim: num(1)?,
                p: parts.get(2).ok_or_else(bad)?.parse().map_err(|_| bad())?,
                extent: num(3)?,
            },
            Some("random-tree") => MetricSpec::RandomTree(num(1)? as usize),
            Some("random-matrix") => MetricSpec::RandomMatrix(num(1)? as usize),
            Some("file") if parts.len() == 2 => MetricSpec::File(parts[1].to_string()),
            _ => return Err(bad()),
        };
        let expected = match spec {
            MetricSpec::Grid { .. } => 4,
            _ => 2,
        };
        if parts.len() != expected {
            return Err(bad());
        }
        Ok(spec)
    }
}

impl std::fmt::Display for MetricSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MetricSpec::Line(n) => write!(f, "line {n}"),
            MetricSpec::Hamming(n) => write!(f, "hamming {n}"),
            MetricSpec::Grid { dim, p, extent } => write!(f, "grid {dim} {p} {extent}"),
            MetricSpec::RandomTree(n) => write!(f, "random-tree {n}"),
            MetricSpec::RandomMatrix(n) => write!(f, "random-matrix {n}"),
            MetricSpec::File(p) => write!(f, "file {p}"),
        }
    }
}

impl MetricSpec {
    /// Builds the space; random kinds are drawn from `rand`.
    pub fn build(&self, rand: &SharedRandomness) -> Result<MetricSpace> {
        let mut rng = rand.rng();
        match self {
            MetricSpec::Line(n) => MetricSpace::integer_line(*n),
            MetricSpec::Hamming(n) => MetricSpace::generalized_hamming(*n),
            MetricSpec::Grid { dim, p, extent } => MetricSpace::lp_grid(*dim, *p, *extent),
            MetricSpec::RandomTree(n) => Ok(MetricSpace::tree(instances::random_tree(&mut rng, *n, 8, true)?)),
            MetricSpec::RandomMatrix(n) => instances::random_matrix_metric(&mut rng, *n, 10.0),
            MetricSpec::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Parse(format!("cannot read metric file {path}: {e}")))?;
                MetricSpace::parse(&text)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub protocol: String,
    /// Gap threshold for the gap protocols.
    pub r: Option<f64>,
    pub metric: MetricSpec,
    pub ns: Vec<usize>,
    pub alphas: Vec<u32>,
    pub trials: usize,
    pub seed: u64,
    pub distribution: Distribution,
    pub max_run: usize,
    pub output: Option<String>,
    pub threads: Option<usize>,
    pub protocol_config: ProtocolConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            protocol: "bounded".into(),
            r: None,
            metric: MetricSpec::Line(16),
            ns: vec![64],
            alphas: vec![4],
            trials: 10,
            seed: 0,
            distribution: Distribution::Random,
            max_run: 4,
            output: None,
            threads: None,
            protocol_config: ProtocolConfig::default(),
        }
    }
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    let items = v
        .split(',')
        .map(|t| t.trim().parse::<T>().map_err(|_| Error::Parse(format!("{key}: bad value '{t}'"))))
        .collect::<Result<Vec<_>>>()?;
    if items.is_empty() {
        return Err(Error::Parse(format!("{key}: empty list")));
    }
    Ok(items)
}

fn parse_one<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Parse(format!("{key}: bad value '{v}'")))
}

impl ExperimentConfig {
    /// Parses `key = value` lines; `#` starts a comment. `n` and `alpha`
    /// accept comma-separated lists and the experiment sweeps their product.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key=value", lineno + 1)))?;
            cfg.set(key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        let pc = &mut self.protocol_config;
        match key {
            "protocol" => self.protocol = v.to_string(),
            "r" => self.r = Some(parse_one(key, v)?),
            "metric" => self.metric = v.parse()?,
            "n" => self.ns = parse_list(key, v)?,
            "alpha" => self.alphas = parse_list(key, v)?,
            "trials" => self.trials = parse_one(key, v)?,
            "seed" => self.seed = parse_one(key, v)?,
            "distribution" => self.distribution = v.parse()?,
            "max_run" => self.max_run = parse_one(key, v)?,
            "output" => self.output = Some(v.to_string()),
            "threads" => self.threads = Some(parse_one(key, v)?),
            "delta" => pc.delta = parse_one(key, v)?,
            "backend" => pc.backend = v.parse()?,
            "search" => pc.search = Some(v.parse::<Search>()?),
            "c1" => pc.c1 = parse_one(key, v)?,
            "partition_factor" => pc.partition_factor = parse_one(key, v)?,
            "c_emb" => pc.c_emb = parse_one(key, v)?,
            _ => return Err(Error::Parse(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let protocol = self.protocol()?;
        if protocol == Protocol::Empty {
            return Err(Error::InvalidParameter("the empty protocol cannot be run".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if self.ns.contains(&0) || self.alphas.contains(&0) {
            return Err(Error::InvalidParameter("n and α must be positive".into()));
        }
        let d = self.protocol_config.delta;
        if !(d > 0.0 && d < 1.0) {
            return Err(Error::InvalidParameter(format!("δ must lie in (0, 1), got {d}")));
        }
        Ok(())
    }

    pub fn protocol(&self) -> Result<Protocol> {
        Protocol::parse(&self.protocol, self.r)
    }

    /// One line per setting, in a form [`ExperimentConfig::parse`] accepts.
    pub fn to_text(&self) -> String {
        let pc = &self.protocol_config;
        let join = |v: Vec<String>| v.join(",");
        let mut s = String::new();
        let _ = writeln!(s, "protocol={}", self.protocol);
        if let Some(r) = self.r {
            let _ = writeln!(s, "r={r}");
        }
        let _ = writeln!(s, "metric={}", self.metric);
        let _ = writeln!(s, "n={}", join(self.ns.iter().map(|v| v.to_string()).collect()));
        let _ = writeln!(s, "alpha={}", join(self.alphas.iter().map(|v| v.to_string()).collect()));
        let _ = writeln!(s, "trials={}", self.trials);
        let _ = writeln!(s, "seed={}", self.seed);
        let _ = writeln!(s, "distribution={}", self.distribution);
        let _ = writeln!(s, "max_run={}", self.max_run);
        let _ = writeln!(s, "delta={}", pc.delta);
        let _ = writeln!(s, "backend={}", pc.backend);
        if let Some(search) = pc.search {
            let _ = writeln!(s, "search={}", if search == Search::Binary { "binary" } else { "linear" });
        }
        let _ = writeln!(s, "c1={}", pc.c1);
        let _ = writeln!(s, "partition_factor={}", pc.partition_factor);
        let _ = writeln!(s, "c_emb={}", pc.c_emb);
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrialOutcome {
    Protocol(ProtocolOutcome),
    /// The protocol returned an error, e.g. an exhausted search budget.
    Error(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub seed: u64,
    pub n: usize,
    pub alpha: u32,
    pub protocol: String,
    /// `None` when the strings exceed [`ORACLE_CAP`].
    pub dtw_true: Option<f64>,
    pub outcome: TrialOutcome,
    pub bits: u64,
    pub ms: f64,
}

/// `t / dtw`, with the `dtw = 0` cases kept apart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ratio {
    Value(f64),
    ExactZero,
    Infinite,
}

impl TrialRecord {
    pub fn estimate(&self) -> Option<f64> {
        match self.outcome {
            TrialOutcome::Protocol(ProtocolOutcome::Estimate(t)) => Some(t),
            _ => None,
        }
    }

    pub fn ratio(&self) -> Option<Ratio> {
        let (t, d) = (self.estimate()?, self.dtw_true?);
        Some(if d > 0.0 {
            Ratio::Value(t / d)
        } else if t == 0.0 {
            Ratio::ExactZero
        } else {
            Ratio::Infinite
        })
    }

    /// Whether the trial met its contract; `None` without an oracle value.
    ///
    /// Estimates must satisfy `dtw <= t <= α·dtw`. Gap bits must be 0 when
    /// `dtw <= n·r/α` and 1 when `dtw > n·r`; in between either is correct.
    pub fn success(&self, r: Option<f64>) -> Option<bool> {
        let d = self.dtw_true?;
        let alpha = f64::from(self.alpha);
        Some(match &self.outcome {
            TrialOutcome::Protocol(ProtocolOutcome::Estimate(t)) => approx_le(d, *t) && approx_le(*t, alpha * d),
            TrialOutcome::Protocol(ProtocolOutcome::GapBit(b)) => {
                let nr = self.n as f64 * r?;
                if approx_le(d, nr / alpha) {
                    *b == 0
                } else if d > nr {
                    *b == 1
                } else {
                    true
                }
            }
            TrialOutcome::Protocol(ProtocolOutcome::Fail) | TrialOutcome::Error(_) => false,
        })
    }

    fn outcome_field(&self) -> String {
        match &self.outcome {
            TrialOutcome::Protocol(ProtocolOutcome::Estimate(_)) => "estimate".into(),
            TrialOutcome::Protocol(ProtocolOutcome::GapBit(b)) => format!("gap{b}"),
            TrialOutcome::Protocol(ProtocolOutcome::Fail) => "fail".into(),
            TrialOutcome::Error(_) => "error".into(),
        }
    }

    /// Fields in [`CSV_COLUMNS`] order.
    pub fn csv_fields(&self) -> [String; 10] {
        let dtw = self.dtw_true.map_or("absent".to_string(), |d| d.to_string());
        let est = self.estimate().map_or(String::new(), |t| t.to_string());
        let ratio = match self.ratio() {
            Some(Ratio::Value(v)) => v.to_string(),
            Some(Ratio::ExactZero) => "exact-zero".into(),
            Some(Ratio::Infinite) => "inf".into(),
            None => String::new(),
        };
        [
            self.seed.to_string(),
            self.n.to_string(),
            self.alpha.to_string(),
            self.protocol.clone(),
            dtw,
            self.outcome_field(),
            est,
            ratio,
            self.bits.to_string(),
            format!("{:.3}", self.ms),
        ]
    }

    pub fn from_csv_fields(f: &csv::StringRecord) -> Result<Self> {
        if f.len() != 10 {
            return Err(Error::Parse(format!("expected 10 fields, got {}", f.len())));
        }
        let bad = |i: usize| Error::Parse(format!("bad field '{}'", &f[i]));
        let num = |i: usize| -> Result<f64> { f[i].parse().map_err(|_| bad(i)) };
        let int = |i: usize| -> Result<u64> { f[i].parse().map_err(|_| bad(i)) };
        let outcome = match &f[5] {
            "estimate" => TrialOutcome::Protocol(ProtocolOutcome::Estimate(num(6)?)),
            "gap0" => TrialOutcome::Protocol(ProtocolOutcome::GapBit(0)),
            "gap1" => TrialOutcome::Protocol(ProtocolOutcome::GapBit(1)),
            "fail" => TrialOutcome::Protocol(ProtocolOutcome::Fail),
            "error" => TrialOutcome::Error(String::new()),
            _ => return Err(bad(5)),
        };
        Ok(TrialRecord {
            seed: int(0)?,
            n: int(1)? as usize,
            alpha: int(2)? as u32,
            protocol: f[3].to_string(),
            dtw_true: if &f[4] == "absent" { None } else { Some(num(4)?) },
            outcome,
            bits: int(8)?,
            ms: num(9)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub trials: usize,
    /// Trials without an oracle value.
    pub skipped: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_ratio: Option<f64>,
    pub max_ratio: Option<f64>,
    pub mean_bits: f64,
    /// Least-squares slope of `log bits` against `log(n/α)` over the
    /// distinct `n/α` values, when there are at least two.
    pub slope: Option<f64>,
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 2 || xs.len() != ys.len() {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

pub fn summarize(records: &[TrialRecord], r: Option<f64>) -> Summary {
    let verdicts: Vec<Option<bool>> = records.iter().map(|t| t.success(r)).collect();
    let evaluated = verdicts.iter().filter(|v| v.is_some()).count();
    let successes = verdicts.iter().filter(|v| **v == Some(true)).count();
    let ratios: Vec<f64> = records
        .iter()
        .filter_map(|t| match t.ratio() {
            Some(Ratio::Value(v)) => Some(v),
            _ => None,
        })
        .collect();
    let mut by_size: BTreeMap<(usize, u32), Vec<f64>> = BTreeMap::new();
    for t in records {
        by_size.entry((t.n, t.alpha)).or_default().push(t.bits as f64);
    }
    let mut per_ratio: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for ((n, a), bits) in &by_size {
        let mean = bits.iter().sum::<f64>() / bits.len() as f64;
        per_ratio.entry((*n as f64 / f64::from(*a)).to_bits()).or_default().push(mean);
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = per_ratio
        .iter()
        .map(|(k, v)| (f64::from_bits(*k).ln(), (v.iter().sum::<f64>() / v.len() as f64).ln()))
        .unzip();
    Summary {
        trials: records.len(),
        skipped: records.len() - evaluated,
        successes,
        success_rate: if evaluated == 0 { 0.0 } else { successes as f64 / evaluated as f64 },
        mean_ratio: (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64),
        max_ratio: ratios.iter().copied().reduce(f64::max),
        mean_bits: records.iter().map(|t| t.bits as f64).sum::<f64>() / records.len().max(1) as f64,
        slope: fit_slope(&xs, &ys),
    }
}

impl std::fmt::Display for Summary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let opt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.4}"));
        write!(
            f,
            "trials={} skipped={} successes={} success_rate={:.4} mean_ratio={} max_ratio={} mean_bits={:.1} slope={}",
            self.trials,
            self.skipped,
            self.successes,
            self.success_rate,
            opt(self.mean_ratio),
            opt(self.max_ratio),
            self.mean_bits,
            opt(self.slope)
        )
    }
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub records: Vec<TrialRecord>,
    pub summary: Summary,
}

/// Seed of trial `index`, derived from the master seed.
pub fn trial_seed(master: u64, index: usize) -> u64 {
    SharedRandomness::new(master).derive(&format!("trial:{index}")).id()
}

/// Runs one trial: Alice's message is built before `y` is drawn.
pub fn run_trial(
    space: &MetricSpace,
    cfg: &ExperimentConfig,
    protocol: Protocol,
    n: usize,
    alpha: u32,
    seed: u64,
) -> TrialRecord {
    let mut rng = SharedRandomness::new(seed).derive("instance").rng();
    let gadget;
    let (space, x, y) = match cfg.distribution {
        Distribution::Gadget(family) => match instances::gadget_instance(&mut rng, family, n, alpha as usize) {
            Ok(g) => {
                gadget = g;
                (&gadget.space, gadget.x.clone(), gadget.y.clone())
            }
            Err(e) => {
                let outcome = TrialOutcome::Error(e.to_string());
                return TrialRecord { seed, n, alpha, protocol: cfg.protocol.clone(), dtw_true: None, outcome, bits: 0, ms: 0.0 };
            }
        },
        _ => {
            let (x, y) = instances::generate(&mut rng, space, cfg.distribution, n, cfg.max_run);
            (space, x, y)
        }
    };
    let rand = SharedRandomness::new(seed);
    let start = Instant::now();
    let result = protocols::sketch(space, &x, protocol, alpha, &cfg.protocol_config, &rand)
        .and_then(|msg| Ok((msg.bits(), protocols::estimate(space, &msg, &y, &rand)?)));
    let ms = start.elapsed().as_secs_f64() * 1e3;
    let (bits, outcome) = match result {
        Ok((bits, out)) => (bits, TrialOutcome::Protocol(out)),
        Err(e) => (0, TrialOutcome::Error(e.to_string())),
    };
    let dtw_true = (x.len() <= ORACLE_CAP && y.len() <= ORACLE_CAP).then(|| dtw_unchecked(space, &x, &y));
    TrialRecord { seed, n, alpha, protocol: cfg.protocol.clone(), dtw_true, outcome, bits, ms }
}

/// Runs every `(n, α, trial)` combination, concurrently, and returns the
/// records ordered by size, α and trial index.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Experiment> {
    cfg.validate()?;
    let protocol = cfg.protocol()?;
    let space = cfg.metric.build(&SharedRandomness::new(cfg.seed).derive("metric"))?;
    let jobs: Vec<(usize, u32, usize)> = cfg
        .ns
        .iter()
        .flat_map(|&n| cfg.alphas.iter().flat_map(move |&a| (0..cfg.trials).map(move |t| (n, a, t))))
        .collect();
    let threads = cfg
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |p| p.get()))
        .clamp(1, jobs.len());
    let slots: Mutex<Vec<Option<TrialRecord>>> = Mutex::new(vec![None; jobs.len()]);
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..threads {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(n, alpha, t)) = jobs.get(i) else { break };
                let rec = run_trial(&space, cfg, protocol, n, alpha, trial_seed(cfg.seed, t));
                slots.lock().unwrap()[i] = Some(rec);
            });
        }
    });
    let records: Vec<TrialRecord> = slots.into_inner().unwrap().into_iter().map(Option::unwrap).collect();
    let summary = summarize(&records, cfg.r);
    Ok(Experiment { config: cfg.clone(), records, summary })
}

/// CSV text: version and configuration as `#` comments, then the rows.
pub fn to_csv(exp: &Experiment) -> String {
    let mut s = format!("# dtw-sketch experiment csv v{CSV_VERSION}\n");
    for line in exp.config.to_text().lines() {
        let _ = writeln!(s, "# {line}");
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS.split(',')).expect("in-memory write");
    for r in &exp.records {
        w.write_record(r.csv_fields()).expect("in-memory write");
    }
    s.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields"));
    s
}

/// Parses CSV produced by [`to_csv`]; returns the configuration comments and the rows.
pub fn parse_csv(text: &str) -> Result<(ExperimentConfig, Vec<TrialRecord>)> {
    let mut cfg_text = String::new();
    for line in text.lines() {
        let Some(c) = line.strip_prefix('#') else { continue };
        let c = c.trim();
        if let Some(v) = c.strip_prefix("dtw-sketch experiment csv v") {
            if v.trim() != CSV_VERSION.to_string() {
                return Err(Error::Parse(format!("unsupported csv version {v}")));
            }
        } else if c.contains('=') {
            cfg_text.push_str(c);
            cfg_text.push('\n');
        }
    }
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let csv_err = |e: csv::Error| Error::Parse(format!("csv: {e}"));
    let headers = reader.headers().map_err(csv_err)?;
    if headers.iter().collect::<Vec<_>>().join(",") != CSV_COLUMNS {
        return Err(Error::Parse("unexpected column header".into()));
    }
    let records = reader
        .records()
        .map(|r| TrialRecord::from_csv_fields(&r.map_err(csv_err)?))
        .collect::<Result<Vec<_>>>()?;
    Ok((ExperimentConfig::parse(&cfg_text)?, records))
}
