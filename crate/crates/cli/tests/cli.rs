use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dtw_sketch::harness;
use dtw_sketch::io::parse_sequences;
use dtw_sketch::protocols::{self, Message, Protocol, ProtocolConfig};
use dtw_sketch::{MetricSpace, SharedRandomness};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_dtw-sketch"));
    c.env_remove("DTW_SKETCH_SEED");
    c
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn exact_prints_three_numbers() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.seq"), "0 0 1 2\n").unwrap();
    fs::write(dir.path().join("b.seq"), "0 2 2\n").unwrap();
    let o = run(&["exact", "a.seq", "b.seq", "--metric", "line"], dir.path());
    assert!(o.status.success(), "{o:?}");
    assert_eq!(stdout(&o).trim(), "1 1 2");

    fs::write(dir.path().join("pair.seq"), "x: 0 1\ny: 1 1\n").unwrap();
    let o = run(&["exact", "pair.seq"], dir.path());
    assert_eq!(stdout(&o).trim(), "1 1 1");
}

#[test]
fn malformed_input_and_usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.seq"), "0 x 1\n").unwrap();
    fs::write(dir.path().join("ok.seq"), "0 1\n").unwrap();
    for args in [
        vec!["exact", "bad.seq", "ok.seq"],
        vec!["exact", "missing.seq", "ok.seq"],
        vec!["exact", "ok.seq", "ok.seq", "--metric", "line 1"],
        vec!["frobnicate"],
        vec!["sketch", "ok.seq", "--protocol", "bounded"],
        vec!["sketch", "ok.seq", "--protocol", "nope", "--alpha", "2", "-o", "m"],
    ] {
        let o = run(&args, dir.path());
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
    assert_eq!(run(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn sketch_estimate_matches_in_process() {
    let dir = tempfile::tempdir().unwrap();
    let x = "0 0 1 1 2 3 3 3 4 5 5 6 7 7 7 0 1 2 2 2 3 4 4 5 6 6 7 7 0 0 1 2";
    let y = "0 1 1 1 2 3 3 4 4 5 5 6 7 7 0 0 1 2 2 3 3 4 4 5 6 7 7 7 0 0 1 2";
    fs::write(dir.path().join("x.seq"), x).unwrap();
    fs::write(dir.path().join("y.seq"), y).unwrap();
    let space = MetricSpace::integer_line(8).unwrap();
    let xs = parse_sequences(x).unwrap().remove(0).letters;
    let ys = parse_sequences(y).unwrap().remove(0).letters;
    let rand = SharedRandomness::new(5);
    let cfg = ProtocolConfig::default();
    let msg = protocols::sketch(&space, &xs, Protocol::Bounded, 4, &cfg, &rand).unwrap();
    let want = protocols::estimate(&space, &msg, &ys, &rand).unwrap();

    let o = run(
        &["sketch", "x.seq", "--metric", "line 8", "--protocol", "bounded", "--alpha", "4", "--seed", "5", "-o", "m.bin"],
        dir.path(),
    );
    assert!(o.status.success(), "{o:?}");
    let bytes = fs::read(dir.path().join("m.bin")).unwrap();
    assert_eq!(bytes, msg.to_bytes());
    assert_eq!(Message::from_bytes(&bytes).unwrap(), msg);

    let o = run(&["estimate", "m.bin", "y.seq", "--metric", "line 8", "--seed", "5"], dir.path());
    assert!(o.status.success(), "{o:?}");
    assert_eq!(stdout(&o).trim(), want.to_string());

    let o = bin()
        .args(["estimate", "m.bin", "y.seq", "--metric", "line 8"])
        .env("DTW_SKETCH_SEED", "5")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(stdout(&o).trim(), want.to_string());

    let o = run(&["estimate", "m.bin", "y.seq", "--metric", "line 8", "--seed", "6"], dir.path());
    assert_eq!(o.status.code(), Some(1));

    fs::write(dir.path().join("trunc.bin"), &bytes[..bytes.len() / 2]).unwrap();
    let o = run(&["estimate", "trunc.bin", "y.seq", "--metric", "line 8", "--seed", "5"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn gap_prints_a_bit() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("x.seq"), "0 0 1 1 2 2 3 3\n").unwrap();
    fs::write(dir.path().join("y.seq"), "0 0 1 1 2 2 3 3\n").unwrap();
    let o = run(&["gap", "x.seq", "y.seq", "--metric", "line 4", "--r", "1", "--alpha", "2"], dir.path());
    assert!(o.status.success(), "{o:?}");
    assert_eq!(stdout(&o).trim(), "0");
}

#[test]
fn gadget_writes_pair_and_predicate() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["gadget", "index", "--alpha", "4", "--t", "8", "--i", "3", "--bits", "10110110", "--verify", "-o", "g.seq"],
        dir.path(),
    );
    assert!(o.status.success(), "{o:?}");
    let text = fs::read_to_string(dir.path().join("g.seq")).unwrap();
    assert!(text.contains("# expect: dtw >= 4"));
    let seqs = parse_sequences(&text).unwrap();
    assert_eq!(seqs.len(), 2);
    assert_eq!(seqs[0].letters.len(), 5 * 12 + 3 * 9);
    assert_eq!(seqs[1].letters.len(), 8 * 3 - 1);

    let o = run(&["exact", "g.seq"], dir.path());
    let dtw: f64 = stdout(&o).split_whitespace().next().unwrap().parse().unwrap();
    assert!(dtw >= 4.0);

    for args in [
        vec!["gadget", "int", "--x", "1,2", "--i", "2", "--y", "1", "--alpha", "3", "--m", "3", "--verify"],
        vec!["gadget", "set", "--set", "3,9", "--a", "7", "--alpha", "4", "--n", "8", "--verify"],
        vec!["gadget", "linear", "--bits", "0110", "--i", "2", "--verify"],
    ] {
        let o = run(&args, dir.path());
        assert!(o.status.success(), "{args:?}: {o:?}");
        assert!(stdout(&o).contains("# expect:"));
    }
    let o = run(&["gadget", "index", "--alpha", "4", "--t", "2", "--i", "3", "--bits", "10"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn validate_metric_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("good.metric"), "matrix 3\n0\n1 0\n2 1 0\n").unwrap();
    fs::write(dir.path().join("bad.metric"), "matrix 3\n0\n1 0\n5 1 0\n").unwrap();
    fs::write(dir.path().join("broken.metric"), "matrix 3\n0\n").unwrap();
    let o = run(&["validate-metric", "good.metric"], dir.path());
    assert!(o.status.success());
    assert!(stdout(&o).contains("aspect_ratio 2"));
    let o = run(&["validate-metric", "bad.metric"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("Triangle"));
    assert_eq!(run(&["validate-metric", "broken.metric"], dir.path()).status.code(), Some(1));
}

#[test]
fn experiment_csv_is_self_describing() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("e.cfg"),
        "protocol = bounded\nmetric = line 8\nn = 32, 64\nalpha = 4\ntrials = 3\ndistribution = planted-near:2\n",
    )
    .unwrap();
    let o = bin()
        .args(["experiment", "e.cfg", "-o", "out.csv"])
        .env("DTW_SKETCH_SEED", "77")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{o:?}");
    let csv = fs::read_to_string(dir.path().join("out.csv")).unwrap();
    assert!(csv.contains("# seed taken from DTW_SKETCH_SEED (77)"));
    let (cfg, rows) = harness::parse_csv(&csv).unwrap();
    assert_eq!(cfg.seed, 77);
    assert_eq!(rows.len(), 6);
    let summary = harness::summarize(&rows, cfg.r);
    let printed = String::from_utf8_lossy(&o.stderr);
    assert!(printed.contains(&format!("successes={}", summary.successes)), "{printed}");
}
