use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn kgraph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kgraph"))
        .args(args)
        .output()
        .expect("spawn kgraph")
}

fn ok(args: &[&str]) -> String {
    let out = kgraph(args);
    assert!(
        out.status.success(),
        "kgraph {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Writes a small CBF file and returns its path.
fn cbf_file(dir: &Path) -> PathBuf {
    let path = dir.join("cbf.tsv");
    ok(&[
        "synth",
        "--kind",
        "cbf",
        "--n-per-class",
        "6",
        "--length",
        "64",
        "--seed",
        "3",
        "--output",
        path.to_str().unwrap(),
    ]);
    path
}

#[test]
fn synth_writes_ucr_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("control.tsv");
    ok(&[
        "synth",
        "--kind",
        "control",
        "--n-per-class",
        "4",
        "--length",
        "60",
        "--output",
        path.to_str().unwrap(),
    ]);
    let text = fs::read_to_string(&path).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 24);
    assert!(rows.iter().all(|r| r.split('\t').count() == 61));
}

#[test]
fn run_writes_labels_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let data = cbf_file(dir.path());
    let out_dir = dir.path().join("out");
    let stdout = ok(&[
        "run",
        "--dataset",
        data.to_str().unwrap(),
        "--m-lengths",
        "5",
        "--seed",
        "1",
        "--lambda",
        "0.5",
        "--export-graph",
        "--export-consensus",
        "--export-features",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert!(stdout.contains("k = 3"), "{stdout}");
    assert!(stdout.contains("ARI"), "{stdout}");

    let labels = fs::read_to_string(out_dir.join("labels.txt")).unwrap();
    let labels: Vec<usize> = labels.lines().map(|l| l.trim().parse().unwrap()).collect();
    assert_eq!(labels.len(), 18);
    assert!(labels.iter().all(|&l| l < 3));

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["k"], 3);
    assert_eq!(report["clusters"].as_array().unwrap().len(), 3);
    assert!(report["graphoids"].is_array());

    let consensus = fs::read_to_string(out_dir.join("consensus.csv")).unwrap();
    assert_eq!(consensus.lines().count(), 18);
    assert_eq!(fs::read_dir(out_dir.join("graphs")).unwrap().count(), 5);
    assert_eq!(fs::read_dir(out_dir.join("features")).unwrap().count(), 5);
}

#[test]
fn fixed_lengths_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let data = cbf_file(dir.path());
    let report = |name: &str, workers: &str, features: &str| {
        let out_dir = dir.path().join(name);
        ok(&[
            "run",
            "--dataset",
            data.to_str().unwrap(),
            "--lengths",
            "8,12,12,20",
            "--workers",
            workers,
            "--features",
            features,
            "--out-dir",
            out_dir.to_str().unwrap(),
        ]);
        fs::read_to_string(out_dir.join("report.json")).unwrap()
    };
    let a = report("a", "1", "transitions");
    let b = report("b", "3", "transitions");
    assert_eq!(a, b);
    assert_ne!(a, report("c", "1", "occupancy"));
    let parsed: serde_json::Value = serde_json::from_str(&a).unwrap();
    let lengths: Vec<u64> = parsed["lengths"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["length"].as_u64().unwrap())
        .collect();
    assert_eq!(lengths, vec![8, 12, 12, 20]);
}

#[test]
fn bench_writes_one_row_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let data = cbf_file(dir.path());
    let csv = dir.path().join("bench.csv");
    ok(&[
        "bench",
        "--dataset",
        data.to_str().unwrap(),
        "--dataset",
        dir.path().join("missing.tsv").to_str().unwrap(),
        "--seeds",
        "0,1",
        "--m-lengths",
        "4",
        "--output",
        csv.to_str().unwrap(),
    ]);
    let text = fs::read_to_string(csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[0].starts_with("dataset,seed,status"));
    let status: Vec<&str> = lines[1..].iter().map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(status, ["ok", "ok", "error", "error"]);
    assert!(lines[3].contains("cannot read"), "{}", lines[3]);
}

#[test]
fn errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = kgraph(&["run", "--dataset", dir.path().join("nope.tsv").to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let constant = dir.path().join("flat.tsv");
    let rows: String = (0..6).map(|i| format!("{}\t{}\n", i % 2, vec!["1.0"; 40].join("\t"))).collect();
    fs::write(&constant, rows).unwrap();
    let out = kgraph(&[
        "run",
        "--dataset",
        constant.to_str().unwrap(),
        "--out-dir",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("degenerate projection"), "{stderr}");

    let out = kgraph(&[
        "run",
        "--dataset",
        constant.to_str().unwrap(),
        "--lambda",
        "1.5",
    ]);
    assert!(!out.status.success());
}
