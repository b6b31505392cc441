use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use dtw_sketch::doc_exchange::Backend;
use dtw_sketch::dtw::{dtw, dtw0, edit_distance};
use dtw_sketch::gadgets::{self, GadgetInstance};
use dtw_sketch::harness::{self, ExperimentConfig, MetricSpec};
use dtw_sketch::io::{format_sequence, parse_sequence, parse_sequences};
use dtw_sketch::protocols::{self, Message, Protocol, ProtocolConfig, ProtocolOutcome, Search};
use dtw_sketch::{MetricSpace, Point, SharedRandomness};

const SEED_ENV: &str = "DTW_SKETCH_SEED";

#[derive(Parser)]
#[command(name = "dtw-sketch", version, about = "One-way sketches for dynamic time warping distance")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print dtw, dtw0 and edit distance of two sequences.
    Exact {
        a: PathBuf,
        /// Second sequence; omitted when `a` holds both.
        b: Option<PathBuf>,
        #[command(flatten)]
        metric: MetricArgs,
    },
    /// Alice's half: write the message for a sequence to a file.
    Sketch {
        x: PathBuf,
        #[command(flatten)]
        metric: MetricArgs,
        #[command(flatten)]
        proto: ProtocolArgs,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Bob's half: answer from a message file and a sequence.
    Estimate {
        message: PathBuf,
        y: PathBuf,
        #[command(flatten)]
        metric: MetricArgs,
        #[arg(long, env = SEED_ENV, default_value_t = 0)]
        seed: u64,
    },
    /// Run a gap protocol on two sequences in one process.
    Gap {
        x: PathBuf,
        y: PathBuf,
        #[command(flatten)]
        metric: MetricArgs,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        alpha: u32,
        /// tree or partition.
        #[arg(long, default_value = "partition")]
        variant: String,
        #[arg(long, env = SEED_ENV, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
    },
    /// Run an experiment described by a key=value config file.
    Experiment {
        config: PathBuf,
        /// CSV destination; overrides `output` in the config. Default: stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate a gadget instance.
    Gadget {
        #[command(subcommand)]
        family: GadgetCmd,
        /// Write the pair here instead of stdout.
        #[arg(short, long, global = true)]
        out: Option<PathBuf>,
        /// Check the predicate with the exact oracle; exit 2 if it fails.
        #[arg(long, global = true)]
        verify: bool,
    },
    /// Check a metric file: axioms, aspect ratio and optional size bounds.
    ValidateMetric {
        file: PathBuf,
        /// Require size and aspect ratio at most n^exponent.
        #[arg(long, num_args = 2, value_names = ["N", "EXPONENT"])]
        poly: Option<Vec<f64>>,
    },
}

#[derive(Subcommand)]
enum GadgetCmd {
    Index {
        #[arg(long)]
        alpha: usize,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        i: usize,
        #[arg(long)]
        bits: String,
    },
    Int {
        /// Comma-separated letters in 1..m-1.
        #[arg(long, value_delimiter = ',')]
        x: Vec<Point>,
        #[arg(long)]
        i: usize,
        #[arg(long)]
        y: Point,
        #[arg(long)]
        alpha: usize,
        #[arg(long)]
        m: Point,
    },
    Set {
        #[arg(long, value_delimiter = ',')]
        set: Vec<Point>,
        #[arg(long)]
        a: Point,
        #[arg(long)]
        alpha: usize,
        #[arg(long)]
        n: usize,
    },
    Linear {
        #[arg(long)]
        bits: String,
        #[arg(long)]
        i: usize,
    },
}

#[derive(Args)]
struct MetricArgs {
    /// `line [N]`, `hamming [N]`, `grid D P E`, `random-tree N`,
    /// `random-matrix N` or `file PATH`. Without N the size is inferred from
    /// the sequences.
    #[arg(long, default_value = "line")]
    metric: String,
    /// Seed for random metric kinds.
    #[arg(long, default_value_t = 0)]
    metric_seed: u64,
}

#[derive(Args)]
struct ProtocolArgs {
    /// bounded, gap-tree, gap-partition, adtw-tree, adtw-general or adtw-separable.
    #[arg(long)]
    protocol: String,
    #[arg(long)]
    alpha: u32,
    /// Threshold for the gap protocols.
    #[arg(long)]
    r: Option<f64>,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// auto, enumeration or hierarchical.
    #[arg(long, default_value = "auto")]
    backend: String,
    /// linear or binary ladder search.
    #[arg(long)]
    search: Option<String>,
    #[arg(long)]
    c1: Option<f64>,
    #[arg(long)]
    partition_factor: Option<f64>,
    #[arg(long)]
    c_emb: Option<f64>,
}

impl ProtocolArgs {
    fn config(&self) -> Result<ProtocolConfig> {
        let d = ProtocolConfig::default();
        Ok(ProtocolConfig {
            delta: self.delta,
            backend: self.backend.parse::<Backend>()?,
            search: self.search.as_deref().map(str::parse::<Search>).transpose()?,
            c1: self.c1.unwrap_or(d.c1),
            partition_factor: self.partition_factor.unwrap_or(d.partition_factor),
            c_emb: self.c_emb.unwrap_or(d.c_emb),
        })
    }
}

/// Failure kinds mapped to exit codes.
enum Exit {
    Usage(anyhow::Error),
    Verification(String),
}

impl From<dtw_sketch::Error> for Exit {
    fn from(e: dtw_sketch::Error) -> Self {
        Exit::Usage(e.into())
    }
}

impl From<anyhow::Error> for Exit {
    fn from(e: anyhow::Error) -> Self {
        Exit::Usage(e)
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn read_seq(path: &Path) -> Result<Vec<Point>> {
    parse_sequence(&read_text(path)?).with_context(|| format!("in {}", path.display()))
}

fn build_metric(args: &MetricArgs, seqs: &[&[Point]]) -> Result<MetricSpace> {
    let inferred = || {
        let max = seqs.iter().flat_map(|s| s.iter()).copied().max().unwrap_or(0);
        (max + 1).max(2)
    };
    let space = match args.metric.trim() {
        "line" => MetricSpace::integer_line(inferred())?,
        "hamming" => MetricSpace::generalized_hamming(inferred())?,
        spec => spec
            .parse::<MetricSpec>()?
            .build(&SharedRandomness::new(args.metric_seed).derive("metric"))?,
    };
    for s in seqs {
        space.check_sequence(s)?;
    }
    Ok(space)
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn gadget_text(g: &GadgetInstance, params: &str) -> String {
    format!(
        "# gadget {} {params}\n# expect: {}\n# metric: {}\n{}{}",
        g.family.name(),
        g.expected,
        g.space.to_text().lines().next().unwrap_or(""),
        format_sequence(Some("x"), &g.x),
        format_sequence(Some("y"), &g.y)
    )
}

fn run(cli: Cli) -> Result<(), Exit> {
    match cli.command {
        Command::Exact { a, b, metric } => {
            let (x, y) = match b {
                Some(b) => (read_seq(&a)?, read_seq(&b)?),
                None => {
                    let seqs = parse_sequences(&read_text(&a)?)?;
                    if seqs.len() != 2 {
                        return Err(anyhow::anyhow!("{} must hold two sequences", a.display()).into());
                    }
                    (seqs[0].letters.clone(), seqs[1].letters.clone())
                }
            };
            let space = build_metric(&metric, &[&x, &y])?;
            println!(
                "{} {} {}",
                dtw(&space, &x, &y)?,
                dtw0(&x, &y)?,
                edit_distance(&x, &y)
            );
        }
        Command::Sketch { x, metric, proto, out } => {
            let x = read_seq(&x)?;
            let space = build_metric(&metric, &[&x])?;
            let protocol = Protocol::parse(&proto.protocol, proto.r)?;
            let rand = SharedRandomness::new(proto.seed);
            let msg = protocols::sketch(&space, &x, protocol, proto.alpha, &proto.config()?, &rand)
                ?;
            fs::write(&out, msg.to_bytes()).with_context(|| format!("cannot write {}", out.display()))?;
            println!("bits {}", msg.bits());
        }
        Command::Estimate { message, y, metric, seed } => {
            let bytes = fs::read(&message).with_context(|| format!("cannot read {}", message.display()))?;
            let msg = Message::from_bytes(&bytes)?;
            let y = read_seq(&y)?;
            let space = build_metric(&metric, &[&y])?;
            let out = protocols::estimate(&space, &msg, &y, &SharedRandomness::new(seed))
                ?;
            println!("{out}");
        }
        Command::Gap { x, y, metric, r, alpha, variant, seed, delta } => {
            let (x, y) = (read_seq(&x)?, read_seq(&y)?);
            let space = build_metric(&metric, &[&x, &y])?;
            let protocol = match variant.as_str() {
                "tree" => Protocol::GapTree { r },
                "partition" => Protocol::GapPartition { r },
                _ => return Err(anyhow::anyhow!("unknown gap variant '{variant}'").into()),
            };
            let cfg = ProtocolConfig { delta, ..ProtocolConfig::default() };
            let rand = SharedRandomness::new(seed);
            let msg = protocols::sketch(&space, &x, protocol, alpha, &cfg, &rand)?;
            let out = protocols::estimate(&space, &msg, &y, &rand)?;
            let ProtocolOutcome::GapBit(bit) = out else { unreachable!("gap protocols answer with a bit") };
            println!("{bit}");
            eprintln!("bits {}", msg.bits());
        }
        Command::Experiment { config, output } => {
            let text = read_text(&config)?;
            let mut cfg = ExperimentConfig::parse(&text).with_context(|| format!("in {}", config.display()))?;
            let has_seed = text.lines().any(|l| l.split('#').next().unwrap().trim_start().starts_with("seed"));
            let mut seed_note = None;
            if !has_seed {
                if let Ok(v) = std::env::var(SEED_ENV) {
                    cfg.seed = v.parse().with_context(|| format!("{SEED_ENV}={v} is not a seed"))?;
                    seed_note = Some(format!("# seed taken from {SEED_ENV} ({v})\n"));
                }
            }
            let exp = harness::run_experiment(&cfg)?;
            let mut csv = harness::to_csv(&exp);
            if let Some(note) = seed_note {
                let at = csv.find('\n').map_or(csv.len(), |i| i + 1);
                csv.insert_str(at, &note);
            }
            let dest = output.or_else(|| cfg.output.as_ref().map(PathBuf::from));
            write_or_print(dest.as_deref(), &csv)?;
            eprintln!("{}", exp.summary);
        }
        Command::Gadget { family, out, verify } => {
            let (g, params) = match family {
                GadgetCmd::Index { alpha, t, i, bits } => {
                    let b = gadgets::parse_bits(&bits)?;
                    if b.len() != t {
                        return Err(anyhow::anyhow!("--bits has {} bits but --t is {t}", b.len()).into());
                    }
                    (gadgets::gen_index_gadget(&b, i, alpha)?, format!("alpha={alpha} t={t} i={i} bits={bits}"))
                }
                GadgetCmd::Int { x, i, y, alpha, m } => {
                    let xs = x.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
                    (gadgets::gen_int_gadget(&x, i, y, alpha, m)?, format!("x={xs} i={i} y={y} alpha={alpha} m={m}"))
                }
                GadgetCmd::Set { set, a, alpha, n } => {
                    let s = set.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
                    (gadgets::gen_set_gadget(&set, a, alpha, n)?, format!("set={s} a={a} alpha={alpha} n={n}"))
                }
                GadgetCmd::Linear { bits, i } => {
                    (gadgets::gen_linear_gadget(&gadgets::parse_bits(&bits)?, i)?, format!("bits={bits} i={i}"))
                }
            };
            write_or_print(out.as_deref(), &gadget_text(&g, &params))?;
            if verify {
                let value = g.measure()?;
                if !g.check()? {
                    return Err(Exit::Verification(format!("predicate '{}' fails: measured {value}", g.expected)));
                }
                eprintln!("verified: {} (measured {value})", g.expected);
            }
        }
        Command::ValidateMetric { file, poly } => {
            let space = MetricSpace::parse(&read_text(&file)?).with_context(|| format!("in {}", file.display()))?;
            let poly = poly.map(|v| (v[0] as usize, v[1]));
            let report = space.validate(poly);
            println!("size {}", report.size);
            println!("aspect_ratio {}", report.aspect_ratio);
            if let Some(ok) = report.poly_bounded {
                println!("poly_bounded {ok}");
            }
            for v in &report.violations {
                println!("violation {v:?}");
            }
            if !report.is_ok() {
                return Err(Exit::Verification(format!("{} violation(s)", report.violations.len())));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Exit::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Exit::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(2)
        }
    }
}
