//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p dtw-sketch-cli --test acceptance`. A single
//! criterion can be selected by number: `... --test acceptance -- 4`.

use std::fs;
use std::process::Command;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use dtw_sketch::decompositions::{declared_sigma, frt_embed, r_simplify, sample_partition, C_FRT};
use dtw_sketch::doc_exchange::Backend;
use dtw_sketch::dtw::{dtw, dtw0, dtw_brute, edit_distance, optimal_correspondence};
use dtw_sketch::gadgets::{self, GadgetInstance};
use dtw_sketch::harness::instances::{planted_near, random_matrix_metric, random_runs, random_tree};
use dtw_sketch::harness::{fit_slope, MetricSpec};
use dtw_sketch::io::format_sequence;
use dtw_sketch::protocols::{self, Protocol, ProtocolConfig, ProtocolOutcome};
use dtw_sketch::{MetricSpace, Point, SharedRandomness};
use rand::Rng;

const TOL: f64 = 1e-9;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

/// Maps `f` over `0..n` on all cores; results are in index order.
fn par_map<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync) -> Vec<T> {
    let threads = std::thread::available_parallelism().map_or(1, |p| p.get()).min(n.max(1));
    let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..n).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..threads {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let v = f(i);
                slots.lock().unwrap()[i] = Some(v);
            });
        }
    });
    slots.into_inner().unwrap().into_iter().map(Option::unwrap).collect()
}

fn rng_for(label: &str, i: usize) -> impl Rng {
    SharedRandomness::new(2024).derive(label).derive(&i.to_string()).rng()
}

fn all_strings(alphabet: Point, max_len: usize) -> Vec<Vec<Point>> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<Point>> = vec![vec![]];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|s| {
                (0..alphabet).map(move |c| {
                    let mut t = s.clone();
                    t.push(c);
                    t
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

fn c1_oracle() -> Verdict {
    let line = MetricSpace::integer_line(3).unwrap();
    let strings = all_strings(3, 5);
    let mismatches = AtomicUsize::new(0);
    let per = par_map(strings.len(), |i| {
        let mut bad = 0;
        for y in &strings {
            if dtw(&line, &strings[i], y).unwrap() != dtw_brute(&line, &strings[i], y, None).unwrap() {
                bad += 1;
            }
        }
        bad
    });
    let exhaustive = strings.len() * strings.len();
    mismatches.fetch_add(per.iter().sum::<usize>(), Ordering::Relaxed);

    let space = MetricSpace::integer_line(8).unwrap();
    let random = par_map(10_000, |i| {
        let mut rng = rng_for("c1", i);
        let lx = rng.random_range(1..=11);
        let ly = rng.random_range(1..=12 - lx);
        let x: Vec<Point> = (0..lx).map(|_| rng.random_range(0..8)).collect();
        let y: Vec<Point> = (0..ly).map(|_| rng.random_range(0..8)).collect();
        dtw(&space, &x, &y).unwrap() != dtw_brute(&space, &x, &y, None).unwrap()
    });
    let bad = mismatches.load(Ordering::Relaxed) + random.iter().filter(|&&b| b).count();
    verdict(bad == 0, format!("{exhaustive} exhaustive + 10000 random pairs, {bad} mismatches"))
}

fn run_free(rng: &mut impl Rng, len: usize, alphabet: Point) -> Vec<Point> {
    let mut x = vec![rng.random_range(0..alphabet)];
    while x.len() < len {
        let c = (x[x.len() - 1] + rng.random_range(1..alphabet)) % alphabet;
        x.push(c);
    }
    x
}

fn c2_sandwich() -> Verdict {
    let bad = par_map(10_000, |i| {
        let mut rng = rng_for("c2", i);
        let alphabet = rng.random_range(2..=8);
        let (lx, ly) = (rng.random_range(1..=40), rng.random_range(1..=40));
        let x = run_free(&mut rng, lx, alphabet);
        let y = run_free(&mut rng, ly, alphabet);
        let d0 = dtw0(&x, &y).unwrap() as usize;
        let ed = edit_distance(&x, &y);
        !(d0 <= ed && ed <= 3 * d0)
    })
    .iter()
    .filter(|&&b| b)
    .count();
    verdict(bad == 0, format!("10000 run-free pairs, {bad} violations"))
}

#[derive(Default, Clone, Copy)]
struct ClauseStats {
    checks: usize,
    close: usize,
    far: usize,
    violations: usize,
}

fn c3_simplification() -> Verdict {
    let stats = par_map(1000, |i| {
        let mut rng = rng_for("c3", i);
        let nodes = rng.random_range(2..=32);
        let top = rng.random_range(2..=8);
        let tree = random_tree(&mut rng, nodes, top, false).unwrap();
        let space = MetricSpace::tree(tree.clone());
        let len = rng.random_range(1..=64);
        let x = random_runs(&mut rng, len, nodes as u32, 4);
        let (k, ly) = (rng.random_range(0..=4), rng.random_range(1..=64));
        let y = if rng.random_bool(0.5) {
            planted_near(&mut rng, &x, k, nodes as u32)
        } else {
            random_runs(&mut rng, ly, nodes as u32, 4)
        };
        let n = x.len().max(y.len()) as f64;
        let d = dtw(&space, &x, &y).unwrap();
        let mut s = ClauseStats::default();
        let top = tree.max_edge().unwrap_or(1.0).log2().ceil() as i32 + 3;
        for k in 0..=top.max(0) {
            let r = 2f64.powi(k);
            let sx = r_simplify(&tree, &x, r).unwrap();
            let sy = r_simplify(&tree, &y, r).unwrap();
            s.checks += 1;
            let mut letters: Vec<Point> = sx.iter().chain(&sy).copied().collect();
            letters.sort_unstable();
            letters.dedup();
            for (a_i, &a) in letters.iter().enumerate() {
                for &b in &letters[a_i + 1..] {
                    if space.dist(a, b) <= r / 4.0 {
                        s.violations += 1;
                    }
                }
            }
            let ds = dtw(&space, &sx, &sy).unwrap();
            for alpha in [1.0, 2.0, 4.0, 8.0, 16.0, 32.0] {
                if d <= n * r / alpha * (1.0 + TOL) {
                    s.close += 1;
                    let d0s = dtw0(&sx, &sy).unwrap() as f64;
                    if ds > n * r / alpha * (1.0 + TOL) || d0s > 4.0 * n / alpha {
                        s.violations += 1;
                    }
                }
            }
            if d > n * r * (1.0 + TOL) {
                s.far += 1;
                if ds <= n * r / 2.0 {
                    s.violations += 1;
                }
            }
        }
        s
    });
    let t = stats.iter().fold(ClauseStats::default(), |a, s| ClauseStats {
        checks: a.checks + s.checks,
        close: a.close + s.close,
        far: a.far + s.far,
        violations: a.violations + s.violations,
    });
    verdict(
        t.violations == 0 && t.close > 0 && t.far > 0,
        format!(
            "1000 trees, {} (pair, r) checks, {} close-premise and {} far-premise cases, {} violations",
            t.checks, t.close, t.far, t.violations
        ),
    )
}

fn c4_bounded() -> Verdict {
    let (n, alpha, delta) = (512usize, 16u32, 1.0 / 512.0);
    let line = MetricSpace::integer_line(8).unwrap();
    let cfg = ProtocolConfig { delta, ..ProtocolConfig::default() };
    let nf = n as f64;
    let results = par_map(200, |i| {
        let mut rng = rng_for("c4", i);
        let x = random_runs(&mut rng, n, 8, 40);
        let y = planted_near(&mut rng, &x, 8, 8);
        assert!(dtw0(&x, &y).unwrap() as usize <= n / alpha as usize);
        let rand = SharedRandomness::new(i as u64);
        let msg = protocols::sketch(&line, &x, Protocol::Bounded, alpha, &cfg, &rand).unwrap();
        let bits = msg.bits();
        let serialized = msg.to_bytes().len() as u64 * 8 - 64;
        let c_de = msg.bounded().unwrap().sketch.scheme.c_de();
        let bound = c_de * (3.0 * nf / f64::from(alpha) * nf.log2() + (1.0 / delta).log2())
            + 2.0 * nf / f64::from(alpha) * nf.log2();
        let d = dtw(&line, &x, &y).unwrap();
        let ok = match protocols::estimate(&line, &msg, &y, &rand).unwrap() {
            ProtocolOutcome::Estimate(t) => d <= t * (1.0 + TOL) && t <= f64::from(alpha) * d * (1.0 + TOL),
            _ => false,
        };
        let framed_ok = serialized.div_ceil(8) == bits.div_ceil(8);
        (ok, bits, bound, framed_ok, c_de)
    });
    let ok = results.iter().filter(|r| r.0).count();
    let bits_ok = results.iter().all(|r| r.1 as f64 <= r.2 && r.3);
    let max_bits = results.iter().map(|r| r.1).max().unwrap();
    let bound = results.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
    let c_de = results[0].4;
    verdict(
        ok as f64 >= 0.95 * 200.0 && bits_ok,
        format!("{ok}/200 correct estimates; max bits {max_bits} <= bound {bound:.0} (c_de {c_de}): {bits_ok}"),
    )
}

/// Largest power of two `r` with `n·r < d`, or the smallest with `d <= n·r/α`.
fn tight_r(d: f64, n: f64, alpha: f64, far: bool) -> f64 {
    if far {
        2f64.powf(((d / n).log2() - 1e-9).ceil() - 1.0)
    } else {
        2f64.powf((d * alpha / n).log2().ceil())
    }
}

fn gap_side(
    label: &str,
    space: &MetricSpace,
    protocol_for: impl Fn(f64) -> Protocol + Sync,
    n: usize,
    alpha: u32,
    max_run: usize,
    far: bool,
) -> (usize, usize) {
    let size = space.size() as u32;
    let nf = n as f64;
    let results = par_map(200, |i| {
        let mut rng = rng_for(label, i + if far { 10_000 } else { 0 });
        let (x, y, r) = loop {
            let x = random_runs(&mut rng, n, size, max_run);
            let y = if far {
                random_runs(&mut rng, n, size, max_run)
            } else {
                let k = rng.random_range(1..=4);
                planted_near(&mut rng, &x, k, size)
            };
            let d = dtw(space, &x, &y).unwrap();
            if d == 0.0 {
                continue;
            }
            let r = tight_r(d, nf, f64::from(alpha), far).max(space.min_dist());
            let certified = if far { d > nf * r } else { d <= nf * r / f64::from(alpha) };
            if certified {
                break (x, y, r);
            }
        };
        let rand = SharedRandomness::new(i as u64);
        let msg =
            protocols::sketch(space, &x, protocol_for(r), alpha, &ProtocolConfig::default(), &rand).unwrap();
        let out = protocols::estimate(space, &msg, &y, &rand).unwrap();
        Some(out == ProtocolOutcome::GapBit(u8::from(far)))
    });
    let certified = results.iter().flatten().count();
    (results.iter().flatten().filter(|&&b| b).count(), certified)
}

fn c5_gaps() -> Verdict {
    let mut rng = rng_for("c5-tree", 0);
    let tree = MetricSpace::tree(random_tree(&mut rng, 32, 6, true).unwrap());
    let line = MetricSpace::integer_line(64).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, space, alpha, max_run, mk) in [
        ("gap_tree", &tree, 16u32, 8usize, (|r| Protocol::GapTree { r }) as fn(f64) -> Protocol),
        ("gap_partition", &line, 32, 8, |r| Protocol::GapPartition { r }),
    ] {
        let start = Instant::now();
        for far in [false, true] {
            let (ok, total) = gap_side(name, space, mk, 128, alpha, max_run, far);
            pass &= total == 200 && ok as f64 >= 0.9 * total as f64;
            parts.push(format!("{name} {} {ok}/{total}", if far { "far" } else { "close" }));
        }
        pass &= start.elapsed() < Duration::from_secs(300);
    }
    verdict(pass, parts.join(", "))
}

struct EndToEnd {
    name: &'static str,
    space: MetricSpace,
    protocol: Protocol,
    n: usize,
    alpha: u32,
    cfg: ProtocolConfig,
}

fn c6_end_to_end() -> Verdict {
    let mut rng = rng_for("c6-spaces", 0);
    let tree = MetricSpace::tree(random_tree(&mut rng, 32, 8, true).unwrap());
    let matrix = random_matrix_metric(&mut rng, 16, 10.0).unwrap();
    let line = MetricSpace::integer_line(64).unwrap();
    let d = ProtocolConfig::default();
    let runs = [
        EndToEnd { name: "adtw_tree", space: tree, protocol: Protocol::AdtwTree, n: 512, alpha: 32, cfg: d },
        EndToEnd { name: "adtw_general", space: matrix.clone(), protocol: Protocol::AdtwGeneral, n: 256, alpha: 64, cfg: d },
        EndToEnd {
            name: "adtw_general c_emb=2",
            space: matrix,
            protocol: Protocol::AdtwGeneral,
            n: 256,
            alpha: 64,
            cfg: ProtocolConfig { c_emb: 2.0, ..d },
        },
        EndToEnd { name: "adtw_separable", space: line.clone(), protocol: Protocol::AdtwSeparable, n: 512, alpha: 32, cfg: d },
        EndToEnd {
            name: "adtw_separable factor=1.6",
            space: line,
            protocol: Protocol::AdtwSeparable,
            n: 512,
            alpha: 32,
            cfg: ProtocolConfig { partition_factor: 1.6, ..d },
        },
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for run in &runs {
        let size = run.space.size() as u32;
        let results = par_map(100, |i| {
            let mut rng = rng_for(run.name, i);
            let x = random_runs(&mut rng, run.n, size, 4);
            let y = random_runs(&mut rng, run.n, size, 4);
            let rand = SharedRandomness::new(i as u64);
            let msg = protocols::sketch(&run.space, &x, run.protocol, run.alpha, &run.cfg, &rand).unwrap();
            let t = protocols::estimate(&run.space, &msg, &y, &rand).unwrap().estimate();
            let d = dtw(&run.space, &x, &y).unwrap();
            let ratio = t.map(|t| if d == 0.0 { if t == 0.0 { 1.0 } else { f64::INFINITY } } else { t / d });
            let ok = ratio.is_some_and(|q| (1.0 - TOL..=f64::from(run.alpha) * (1.0 + TOL)).contains(&q));
            (ok, ratio.unwrap_or(f64::NAN), msg.bits())
        });
        let ok = results.iter().filter(|r| r.0).count();
        let mean_ratio = results.iter().map(|r| r.1).sum::<f64>() / 100.0;
        let mean_bits = results.iter().map(|r| r.2 as f64).sum::<f64>() / 100.0;
        pass &= ok as f64 >= 200.0 / 3.0;
        parts.push(format!("{} {ok}/100 (mean ratio {mean_ratio:.2}, mean bits {mean_bits:.0})", run.name));
    }
    verdict(pass, parts.join("; "))
}

fn c7_frt() -> Verdict {
    let mut rng = rng_for("c7", 0);
    let spaces = [
        ("matrix 256", random_matrix_metric(&mut rng, 256, 10.0).unwrap().normalize().unwrap()),
        ("line 256", MetricSpace::integer_line(256).unwrap()),
        ("grid 16x16", MetricSpace::lp_grid(2, 2.0, 16).unwrap()),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, space) in &spaces {
        let n = space.size();
        let per_seed = par_map(100, |s| {
            let emb = frt_embed(space, &SharedRandomness::new(s as u64).derive("c7")).unwrap();
            let mut contractions = 0usize;
            let mut ratios = vec![0.0f64; n * (n - 1) / 2];
            let mut k = 0;
            for a in 0..n as Point {
                for b in a + 1..n as Point {
                    let (dt, d) = (emb.embedded_distance(a, b), space.dist(a, b));
                    if dt < d * (1.0 - TOL) {
                        contractions += 1;
                    }
                    ratios[k] = dt / d;
                    k += 1;
                }
            }
            (contractions, ratios)
        });
        let contractions: usize = per_seed.iter().map(|p| p.0).sum();
        let pairs: Vec<(Point, Point)> =
            (0..n as Point).flat_map(|a| (a + 1..n as Point).map(move |b| (a, b))).collect();
        let mean_per_pair: Vec<f64> = (0..pairs.len())
            .map(|k| per_seed.iter().map(|p| p.1[k]).sum::<f64>() / per_seed.len() as f64)
            .collect();
        let log_n = (n as f64).log2();
        let avg = mean_per_pair.iter().sum::<f64>() / pairs.len() as f64;
        let close: Vec<f64> = pairs
            .iter()
            .zip(&mean_per_pair)
            .filter(|((a, b), _)| space.dist(*a, *b) <= 2.0 * space.min_dist())
            .map(|(_, m)| *m)
            .collect();
        let close_avg = close.iter().sum::<f64>() / close.len() as f64;
        let worst = mean_per_pair.iter().copied().fold(0.0, f64::max);
        pass &= contractions == 0 && avg <= C_FRT * log_n && close_avg <= C_FRT * log_n;
        parts.push(format!(
            "{name}: {contractions} contractions, mean expansion {avg:.2} (c {:.2}), closest pairs {close_avg:.2} (c {:.2}), noisiest single pair {worst:.2}",
            avg / log_n,
            close_avg / log_n
        ));
    }
    verdict(pass, format!("{}; documented c_frt = {C_FRT}", parts.join("; ")))
}

fn separation_rate(space: &MetricSpace, a: Point, b: Point, delta: f64, samples: usize, label: &str) -> f64 {
    let hits = par_map(samples, |s| {
        let p = sample_partition(space, delta, &SharedRandomness::new(s as u64).derive(label)).unwrap();
        p.separates(a, b)
    });
    hits.iter().filter(|&&h| h).count() as f64 / samples as f64
}

fn c8_separation() -> Verdict {
    const N: usize = 10_000;
    let mut pass = true;
    let mut parts = Vec::new();

    let line = MetricSpace::integer_line(32).unwrap();
    let mut worst_gap = 0.0f64;
    for (a, b, delta) in [(0, 2, 4.0), (5, 6, 4.0), (3, 6, 4.0), (10, 13, 8.0), (7, 12, 10.0)] {
        let p = separation_rate(&line, a, b, delta, N, &format!("c8-line-{a}-{b}-{delta}"));
        worst_gap = worst_gap.max((p - f64::from(b - a) / delta).abs());
    }
    pass &= worst_gap <= 0.02;
    parts.push(format!("shifted grid max |p - d/delta| = {worst_gap:.4}"));

    let mut rng = rng_for("c8-ckr", 0);
    let matrix = random_matrix_metric(&mut rng, 32, 10.0).unwrap();
    let sigma = declared_sigma(&matrix);
    let mut ckr_ok = true;
    let mut worst_slack = f64::INFINITY;
    for (a, b, delta) in [(0, 1, 8.0), (2, 9, 12.0), (4, 17, 6.0)] {
        let p = separation_rate(&matrix, a, b, delta, N, &format!("c8-ckr-{a}-{b}"));
        let se = (p * (1.0 - p) / N as f64).sqrt();
        let bound = sigma * matrix.dist(a, b) / delta;
        ckr_ok &= p <= bound + 3.0 * se;
        worst_slack = worst_slack.min(bound + 3.0 * se - p);
    }
    pass &= ckr_ok;
    parts.push(format!("CKR (sigma {sigma:.2}) within bound: {ckr_ok}, min slack {worst_slack:.3}"));

    let line = MetricSpace::integer_line(64).unwrap();
    let (n, alpha, r, c1) = (128usize, 32u32, 64.0, 0.1);
    let samples = 2000;
    let cuts = par_map(samples, |i| {
        let mut rng = rng_for("c8-cut", i);
        let (x, y) = loop {
            let x = random_runs(&mut rng, n, 64, 8);
            let k = rng.random_range(1..=6);
            let y = planted_near(&mut rng, &x, k, 64);
            if dtw(&line, &x, &y).unwrap() <= n as f64 * r / f64::from(alpha) {
                break (x, y);
            }
        };
        let corr = optimal_correspondence(&line, &x, &y).unwrap();
        let p = sample_partition(&line, c1 * r, &SharedRandomness::new(i as u64).derive("c8-cut")).unwrap();
        p.cut_edges(&corr) as f64
    });
    let mean = cuts.iter().sum::<f64>() / samples as f64;
    let var = cuts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (samples - 1) as f64;
    let se = (var / samples as f64).sqrt();
    let bound = 2.0 * n as f64 * declared_sigma(&line) / (c1 * f64::from(alpha));
    pass &= mean <= bound + 3.0 * se;
    parts.push(format!("cut edges mean {mean:.3} (se {se:.3}) <= {bound:.1}"));
    verdict(pass, parts.join("; "))
}

fn bit_strings(t: usize) -> impl Iterator<Item = Vec<bool>> {
    (0..1u32 << t).map(move |m| (0..t).map(|j| m >> j & 1 == 1).collect())
}

fn tuples(values: &[Point], k: usize) -> Vec<Vec<Point>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        out = out.iter().flat_map(|t| values.iter().map(move |&v| [t.clone(), vec![v]].concat())).collect();
    }
    out
}

fn c9_gadgets() -> Verdict {
    let mut instances: Vec<Box<dyn Fn() -> GadgetInstance + Sync>> = Vec::new();
    for alpha in 2..=8usize {
        for t in 1..=6 {
            for bits in bit_strings(t) {
                for i in 1..=t {
                    let bits = bits.clone();
                    instances.push(Box::new(move || gadgets::gen_index_gadget(&bits, i, alpha).unwrap()));
                }
            }
        }
    }
    let counts_index = instances.len();
    for m in 2..=4 as Point {
        let letters: Vec<Point> = (1..m).collect();
        for alpha in m as usize..=6 {
            for k in 1..=4 {
                for xvec in tuples(&letters, k) {
                    for i in 1..=k {
                        for &yi in &letters {
                            let xvec = xvec.clone();
                            instances.push(Box::new(move || gadgets::gen_int_gadget(&xvec, i, yi, alpha, m).unwrap()));
                        }
                    }
                }
            }
        }
    }
    let counts_int = instances.len() - counts_index;
    for n in 1..=64usize {
        for alpha in (1..=n).filter(|a| n % a == 0) {
            for trial in 0..4 {
                let mut rng = rng_for("c9-set", n * 1000 + alpha * 10 + trial);
                let universe: Vec<Point> = (0..(2 * n / alpha + 2) as Point).collect();
                let set: Vec<Point> = rand::seq::IndexedRandom::choose_multiple(&universe[..], &mut rng, n / alpha)
                    .copied()
                    .collect();
                let a = if trial % 2 == 0 {
                    set[rng.random_range(0..set.len())]
                } else {
                    *universe.iter().find(|u| !set.contains(u)).unwrap()
                };
                instances.push(Box::new(move || gadgets::gen_set_gadget(&set, a, alpha, n).unwrap()));
            }
        }
    }
    let counts_set = instances.len() - counts_index - counts_int;
    for n in 1..=64usize {
        let strings: Vec<Vec<bool>> = if n <= 6 {
            bit_strings(n).collect()
        } else {
            let mut rng = rng_for("c9-linear", n);
            (0..4).map(|_| (0..n).map(|_| rng.random_bool(0.5)).collect()).collect()
        };
        for bits in strings {
            for i in 1..=n {
                let bits = bits.clone();
                instances.push(Box::new(move || {
                    let g = gadgets::gen_linear_gadget(&bits, i).unwrap();
                    let e = gadgets::linear_addend(bits.len(), i).unwrap();
                    let sum: Vec<Point> = g.x.iter().zip(&e).map(|(a, b)| a + b).collect();
                    assert_eq!(sum, g.y, "additivity witness");
                    g
                }));
            }
        }
    }
    let counts_linear = instances.len() - counts_index - counts_int - counts_set;
    let bad = par_map(instances.len(), |i| !instances[i]().check().unwrap()).iter().filter(|&&b| b).count();
    verdict(
        bad == 0,
        format!(
            "index {counts_index}, int {counts_int}, set {counts_set}, linear {counts_linear} instances; {bad} violations"
        ),
    )
}

fn mean_alice_bits(n: usize, alpha: u32, trials: usize) -> f64 {
    let line = MetricSpace::integer_line(8).unwrap();
    let cfg = ProtocolConfig { backend: Backend::Enumeration, ..ProtocolConfig::default() };
    let bits = par_map(trials, |i| {
        let mut rng = rng_for("c10", n * 100 + alpha as usize * 7 + i);
        let x = random_runs(&mut rng, n, 8, 4);
        let msg = protocols::sketch(&line, &x, Protocol::Bounded, alpha, &cfg, &SharedRandomness::new(i as u64)).unwrap();
        msg.bits() as f64
    });
    bits.iter().sum::<f64>() / trials as f64
}

fn c10_scaling() -> Verdict {
    let ns = [128usize, 256, 512, 1024];
    let by_n: Vec<f64> = ns.iter().map(|&n| mean_alice_bits(n, 16, 10)).collect();
    let slope_n = fit_slope(
        &ns.iter().map(|&n| (n as f64).ln()).collect::<Vec<_>>(),
        &by_n.iter().map(|b| b.ln()).collect::<Vec<_>>(),
    )
    .unwrap();
    let alphas = [8u32, 16, 32, 64];
    let by_alpha: Vec<f64> = alphas.iter().map(|&a| mean_alice_bits(1024, a, 10)).collect();
    let monotone = by_alpha.windows(2).all(|w| w[1] < w[0]);
    let slope_alpha = fit_slope(
        &alphas.iter().map(|&a| (1.0 / f64::from(a)).ln()).collect::<Vec<_>>(),
        &by_alpha.iter().map(|b| b.ln()).collect::<Vec<_>>(),
    )
    .unwrap();
    let pass = (slope_n - 1.0).abs() <= 0.2 && monotone && (slope_alpha - 1.0).abs() <= 0.3;
    let fmt = |v: &[f64]| v.iter().map(|b| format!("{b:.0}")).collect::<Vec<_>>().join("/");
    verdict(
        pass,
        format!(
            "bounded, enumeration backend: bits vs n {} slope {slope_n:.3}; bits vs alpha {} slope vs 1/alpha {slope_alpha:.3}, decreasing: {monotone}",
            fmt(&by_n),
            fmt(&by_alpha)
        ),
    )
}

struct CliCase {
    protocol: &'static str,
    metric: &'static str,
    alpha: u32,
    r: Option<f64>,
    extra: &'static [&'static str],
    cfg: ProtocolConfig,
}

fn c11_round_trip() -> Verdict {
    let d = ProtocolConfig::default();
    let cases = [
        CliCase { protocol: "bounded", metric: "line 16", alpha: 4, r: None, extra: &[], cfg: d },
        CliCase { protocol: "gap-tree", metric: "random-tree 32", alpha: 16, r: Some(8.0), extra: &[], cfg: d },
        CliCase { protocol: "gap-partition", metric: "line 16", alpha: 8, r: Some(4.0), extra: &[], cfg: d },
        CliCase { protocol: "adtw-tree", metric: "random-tree 32", alpha: 16, r: None, extra: &[], cfg: d },
        CliCase { protocol: "adtw-general", metric: "random-matrix 16", alpha: 16, r: None, extra: &[], cfg: d },
        CliCase {
            protocol: "adtw-general",
            metric: "random-matrix 16",
            alpha: 32,
            r: None,
            extra: &["--c-emb", "2"],
            cfg: ProtocolConfig { c_emb: 2.0, ..d },
        },
        CliCase { protocol: "adtw-separable", metric: "line 16", alpha: 16, r: None, extra: &[], cfg: d },
        CliCase {
            protocol: "adtw-separable",
            metric: "line 16",
            alpha: 32,
            r: None,
            extra: &["--partition-factor", "1.6", "--search", "linear"],
            cfg: ProtocolConfig { partition_factor: 1.6, search: Some(protocols::Search::Linear), ..d },
        },
    ];
    let dir = tempfile::tempdir().unwrap();
    let exe = env!("CARGO_BIN_EXE_dtw-sketch");
    let mut mismatches = Vec::new();
    let mut runs = 0;
    for (ci, case) in cases.iter().enumerate() {
        let metric_seed = 11 + ci as u64;
        let space = case
            .metric
            .parse::<MetricSpec>()
            .unwrap()
            .build(&SharedRandomness::new(metric_seed).derive("metric"))
            .unwrap();
        let size = space.size() as u32;
        let protocol = Protocol::parse(case.protocol, case.r).unwrap();
        for seed in 0..10u64 {
            let mut rng = rng_for("c11", ci * 100 + seed as usize);
            let x = random_runs(&mut rng, 64, size, 4);
            let y = if seed % 2 == 0 { planted_near(&mut rng, &x, 2, size) } else { random_runs(&mut rng, 64, size, 4) };
            let rand = SharedRandomness::new(seed);
            let msg = protocols::sketch(&space, &x, protocol, case.alpha, &case.cfg, &rand).unwrap();
            let want = protocols::estimate(&space, &msg, &y, &rand).unwrap().to_string();

            let base = dir.path().join(format!("{ci}-{seed}"));
            let (xf, yf, mf) = (base.with_extension("x"), base.with_extension("y"), base.with_extension("msg"));
            fs::write(&xf, format_sequence(None, &x)).unwrap();
            fs::write(&yf, format_sequence(None, &y)).unwrap();
            let seed_s = seed.to_string();
            let alpha_s = case.alpha.to_string();
            let ms = metric_seed.to_string();
            let mut args = vec![
                "sketch",
                xf.to_str().unwrap(),
                "--metric",
                case.metric,
                "--metric-seed",
                &ms,
                "--protocol",
                case.protocol,
                "--alpha",
                &alpha_s,
                "--seed",
                &seed_s,
                "-o",
                mf.to_str().unwrap(),
            ];
            let r_s = case.r.map(|r| r.to_string());
            if let Some(r) = &r_s {
                args.extend(["--r", r]);
            }
            args.extend(case.extra);
            let status = Command::new(exe).args(&args).env_remove("DTW_SKETCH_SEED").output().unwrap();
            runs += 1;
            let bytes = fs::read(&mf).unwrap_or_default();
            let out = Command::new(exe)
                .args(["estimate", mf.to_str().unwrap(), yf.to_str().unwrap(), "--metric", case.metric])
                .args(["--metric-seed", &ms, "--seed", &seed_s])
                .env_remove("DTW_SKETCH_SEED")
                .output()
                .unwrap();
            let got = String::from_utf8_lossy(&out.stdout).trim().to_string();
            if !status.status.success() || bytes != msg.to_bytes() || got != want {
                mismatches.push(format!("{} seed {seed}: '{got}' vs '{want}'", case.protocol));
            }
        }
    }
    verdict(
        mismatches.is_empty(),
        format!("{runs} sketch/estimate process pairs, {} mismatches {:?}", mismatches.len(), mismatches),
    )
}

type Criterion = (usize, &'static str, fn() -> Verdict, u64);

fn main() {
    let criteria: [Criterion; 11] = [
        (1, "DP equals exhaustive oracle", c1_oracle, 60),
        (2, "run-free sandwich dtw0 <= ed <= 3 dtw0", c2_sandwich, 60),
        (3, "r-simplification clauses", c3_simplification, 120),
        (4, "bounded protocol accuracy and size", c4_bounded, 300),
        (5, "gap protocols on certified instances", c5_gaps, 600),
        (6, "end-to-end approximation", c6_end_to_end, 900),
        (7, "FRT non-contraction and expansion", c7_frt, 120),
        (8, "partition separation probabilities", c8_separation, 120),
        (9, "gadget predicates", c9_gadgets, 300),
        (10, "communication scaling", c10_scaling, 300),
        (11, "cross-process sketch/estimate", c11_round_trip, 120),
    ];
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, run, limit) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let v = run();
        let secs = start.elapsed().as_secs_f64();
        let in_time = secs <= limit as f64;
        let pass = v.pass && in_time;
        failed += usize::from(!pass);
        println!(
            "{} [{id:>2}] {name}: {} ({secs:.1}s, limit {limit}s{})",
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            if in_time { "" } else { ", too slow" }
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
