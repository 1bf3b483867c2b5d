use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phonoparse"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn corpus(dir: &Path, name: &str, extra: &[&str]) -> PathBuf {
    let mut args = vec!["gen", name, "--segments", "300"];
    args.extend_from_slice(extra);
    if !extra.contains(&"--noise") {
        args.extend_from_slice(&["--noise", "0.1"]);
    }
    ok(dir, &args);
    dir.join(format!("{name}.post"))
}

fn report(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const SMALL: [&str; 4] = ["--folds", "3", "--fold-length", "100"];

#[test]
fn gen_is_deterministic_in_seed() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    corpus(d, "a", &["--seed", "4"]);
    corpus(d, "b", &["--seed", "4"]);
    corpus(d, "c", &["--seed", "5"]);
    let read = |n: &str| std::fs::read(d.join(n)).unwrap();
    assert_eq!(read("a.post"), read("b.post"));
    assert_eq!(read("a.segs"), read("b.segs"));
    assert_ne!(read("a.post"), read("c.post"));
}

#[test]
fn eval_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    corpus(d, "a", &[]);
    let mut args = vec![
        "eval",
        "a.post",
        "--task",
        "stress",
        "--context",
        "2",
        "--seed",
        "9",
    ];
    args.extend_from_slice(&SMALL);
    let first = ok(d, &[&args[..], &["--report", "r1.json"]].concat());
    let second = ok(d, &[&args[..], &["--report", "r2.json"]].concat());
    assert_eq!(first, second);
    let (r1, r2) = (
        std::fs::read(d.join("r1.json")).unwrap(),
        std::fs::read(d.join("r2.json")).unwrap(),
    );
    assert_eq!(r1, r2);

    let r = report(&d.join("r1.json"));
    let only = &r["reports"][0];
    assert_eq!(only["context"], 2);
    assert_eq!(only["seed"], 9);
    assert_eq!(only["per_fold"].as_array().unwrap().len(), 3);
    let acc = only["segment_accuracy_mean"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&acc));
}

#[test]
fn min_hamming_matches_innerproduct() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    corpus(d, "a", &["--noise", "0.2", "--seed", "2"]);
    let mut args = vec![
        "eval",
        "a.post",
        "--metric",
        "hamming:min,innerproduct",
        "--holdout",
    ];
    args.extend_from_slice(&SMALL);
    args.extend_from_slice(&["--report", "r.json"]);
    ok(d, &args);
    let r = report(&d.join("r.json"));
    let reports = r["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 10);
    for (hm, ip) in reports[..5].iter().zip(&reports[5..]) {
        assert_eq!(hm["context"], ip["context"]);
        assert_eq!(hm["per_fold"], ip["per_fold"]);
    }
}

#[test]
fn eval_sweeps_contexts_by_default() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    corpus(d, "a", &[]);
    let mut args = vec!["eval", "--in", "a.post"];
    args.extend_from_slice(&SMALL);
    let table = ok(d, &args);
    let header: Vec<&str> = table.lines().next().unwrap().split_whitespace().collect();
    assert_eq!(
        header,
        ["task", "ctx", "0", "ctx", "1", "ctx", "2", "ctx", "4", "ctx", "6"]
    );
    assert_eq!(table.lines().count(), 2);
}

#[test]
fn stats_on_noiseless_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "gen",
            "s",
            "-k",
            "9",
            "--templates",
            "1",
            "--segments",
            "400",
        ],
    );
    let out: Value =
        serde_json::from_str(&ok(d, &["stats", "s.post", "--frames", "1000"])).unwrap();
    let unique = out["unique_count"].as_u64().unwrap();
    assert_eq!(out["total_count"], 1000);
    assert!((1..=8).contains(&unique), "{unique}");
    assert_eq!(
        out["ratio_of_total"].as_f64().unwrap(),
        unique as f64 / 1000.0
    );
    assert_eq!(
        out["ratio_of_possible"].as_f64().unwrap(),
        unique as f64 / 512.0
    );
}

#[test]
fn build_then_parse() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    corpus(d, "a", &["--noise", "0"]);
    let listing = ok(
        d,
        &[
            "build",
            "a.post",
            "--task",
            "cv",
            "--context",
            "1",
            "--out",
            "cv",
        ],
    );
    assert_eq!(listing.lines().count(), 2);
    ok(
        d,
        &[
            "parse", "a.post", "--books", "cv.V.cbk", "cv.C.cbk", "--out", "dec.txt",
        ],
    );
    let decisions = std::fs::read_to_string(d.join("dec.txt")).unwrap();
    let segs = std::fs::read_to_string(d.join("a.segs")).unwrap();
    let body: Vec<&str> = decisions.lines().skip(1).collect();
    assert_eq!(body.len(), 300);
    for (dec, seg) in body.iter().zip(segs.lines()) {
        let dec: Vec<&str> = dec.split_whitespace().collect();
        let seg: Vec<&str> = seg.split_whitespace().collect();
        assert_eq!(dec[..2], seg[..2]);
        assert_eq!(format!("cv={}", dec[2]), seg[2]);
    }
}

#[test]
fn cross_eval_runs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    corpus(d, "a", &["--accent", "same"]);
    let mut args = vec![
        "cross-eval",
        "a.post",
        "--task",
        "stress",
        "--books-task",
        "accent",
    ];
    args.extend_from_slice(&["--context", "0", "--report", "r.json"]);
    args.extend_from_slice(&SMALL);
    ok(d, &args);
    let r = report(&d.join("r.json"));
    assert_eq!(r["command"], "cross-eval");
    assert_eq!(r["reports"][0]["books_task"], "accent");
}

#[test]
fn exit_codes_separate_usage_from_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    corpus(d, "a", &[]);

    for args in [
        &["frob"][..],
        &["eval", "a.post", "--metric", "cosine"],
        &["eval", "a.post", "--boundary-policy", "wrap"],
        &["cross-eval", "a.post"],
        &["eval"],
    ] {
        assert_eq!(run(d, args).status.code(), Some(2), "{args:?}");
    }

    let out = run(d, &["eval", "missing.post"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.contains("missing.post"));

    std::fs::write(d.join("bad.post"), "PHONOPOST 1\nK=2 N=2\n0.1 0.2\n0.3 x\n").unwrap();
    std::fs::write(d.join("bad.segs"), "0 2 cv=C\n").unwrap();
    let out = run(d, &["eval", "bad.post"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("bad.post:4:"), "{err}");

    let out = run(d, &["eval", "a.post", "--folds", "0"]);
    assert_eq!(out.status.code(), Some(1));
}
