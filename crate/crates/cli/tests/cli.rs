use std::path::Path;
use std::process::{Command, Output};

fn motivscore(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_motivscore"))
        .args(args)
        .env_remove("MOTIVSCORE_SEED")
        .output()
        .unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth(dir: &Path, n: usize) -> std::path::PathBuf {
    let csv = dir.join("cohort.csv");
    let out = motivscore(&[
        "synth",
        "--n",
        &n.to_string(),
        "--seed",
        "3",
        "--out",
        path(&csv),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    csv
}

#[test]
fn synth_then_stats_and_labels() {
    let dir = tempfile::tempdir().unwrap();
    let csv = synth(dir.path(), 120);
    let body = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(body.lines().count(), 121);

    let stats = motivscore(&["stats", path(&csv)]);
    assert!(stats.status.success());
    let text = String::from_utf8(stats.stdout).unwrap();
    assert!(text.contains("intrinsic"));
    assert!(text.trim_end().ends_with("n = 120"));

    let labels_csv = dir.path().join("labels.csv");
    let labels = motivscore(&["labels", path(&csv), "--out", path(&labels_csv)]);
    assert!(labels.status.success());
    let counts: serde_json::Value = serde_json::from_slice(&labels.stdout).unwrap();
    let total = counts["deep"].as_u64().unwrap() + counts["surface"].as_u64().unwrap();
    assert_eq!(total, 120);
    assert_eq!(
        std::fs::read_to_string(labels_csv).unwrap().lines().count(),
        121
    );
}

#[test]
fn synth_is_seed_deterministic() {
    let a = motivscore(&["synth", "--n", "30", "--seed", "9"]);
    let b = motivscore(&["synth", "--n", "30", "--seed", "9"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn regression_report_feeds_at_risk() {
    let dir = tempfile::tempdir().unwrap();
    let csv = synth(dir.path(), 150);
    let out_dir = dir.path().join("run");
    let run = motivscore(&[
        "experiment",
        "--task",
        "regression",
        "--data",
        path(&csv),
        "--models",
        "DT,LR",
        "--seed",
        "5",
        "--out",
        path(&out_dir),
    ]);
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let report = out_dir.join("report.json");
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(parsed["models"].as_array().unwrap().len(), 2);

    let risk = motivscore(&[
        "at-risk",
        "--model-report",
        path(&report),
        "--threshold",
        "5.0",
    ]);
    assert!(
        risk.status.success(),
        "{}",
        String::from_utf8_lossy(&risk.stderr)
    );
    let flags: serde_json::Value = serde_json::from_slice(&risk.stdout).unwrap();
    for f in flags.as_array().unwrap() {
        assert!(f["predicted_grade"].as_f64().unwrap() < 5.0);
        assert!(f["index"].as_u64().unwrap() < 150);
    }

    let rescored = motivscore(&[
        "at-risk",
        "--model-report",
        path(&report),
        "--data",
        path(&csv),
    ]);
    assert!(rescored.status.success());
    let all: serde_json::Value = serde_json::from_slice(&rescored.stdout).unwrap();
    for f in all.as_array().unwrap() {
        assert!(f["predicted_grade"].as_f64().unwrap() < 4.0);
    }
}

#[test]
fn csv_format_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = motivscore(&[
        "experiment",
        "--task",
        "classification",
        "--models",
        "KNN",
        "--set",
        "synthetic.n=120",
        "--format",
        "csv",
        "--out",
        path(dir.path()),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let t4 = std::fs::read_to_string(dir.path().join("table4.csv")).unwrap();
    assert!(t4.starts_with("metric,KNN\n"));
}

#[test]
fn importance_csv_to_stdout() {
    let out = motivscore(&[
        "importance",
        "--set",
        "synthetic.n=150",
        "--set",
        "rf.n_trees=10",
        "--format",
        "csv",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert!(rows.len() > 5);
    let sum: f64 = rows[1..]
        .iter()
        .map(|r| r.rsplit(',').next().unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((sum - 1.0).abs() < 1e-9);
}

#[test]
fn exit_codes_follow_error_kind() {
    let dir = tempfile::tempdir().unwrap();

    let bad_key = motivscore(&["experiment", "--set", "no.such.key=1"]);
    assert_eq!(bad_key.status.code(), Some(2));

    let bad_task = motivscore(&["experiment", "--task", "clustering"]);
    assert_eq!(bad_task.status.code(), Some(2));

    let threshold = dir.path().join("x.json");
    std::fs::write(&threshold, "{}").unwrap();
    let out_of_range = motivscore(&[
        "at-risk",
        "--model-report",
        path(&threshold),
        "--threshold",
        "9",
    ]);
    assert_eq!(out_of_range.status.code(), Some(2));

    let missing = motivscore(&["stats", path(&dir.path().join("absent.csv"))]);
    assert_eq!(missing.status.code(), Some(3));

    let csv = synth(dir.path(), 20);
    let body = std::fs::read_to_string(&csv).unwrap();
    let mut lines: Vec<String> = body.lines().map(String::from).collect();
    lines[1] = lines[1].replacen(|c: char| c.is_ascii_digit(), "x", 1);
    let broken = dir.path().join("broken.csv");
    std::fs::write(&broken, lines.join("\n")).unwrap();
    let bad_data = motivscore(&["stats", path(&broken)]);
    assert_eq!(bad_data.status.code(), Some(1));
}
