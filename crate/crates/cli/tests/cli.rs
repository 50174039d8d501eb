use std::path::Path;
use std::process::{Command, Output};

fn gfnn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gfnn"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn without_timestamp(json: &str) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_str(json).unwrap();
    v["provenance"]
        .as_object_mut()
        .expect("provenance block")
        .remove("timestamp");
    v
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(gfnn(&["--help"]).status.code(), Some(0));
    assert_eq!(gfnn(&["--version"]).status.code(), Some(0));
    assert_eq!(gfnn(&["train", "--help"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(gfnn(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(gfnn(&["theory-check", "--bogus-flag"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    assert!(gfnn(&["gen-two-circles", "--n", "100", "--train", "10", "--val", "10", "--out", path(&data)])
        .status
        .success());
    let out = gfnn(&["train", "--dataset", path(&data), "--model", "bogus", "--out", path(&dir.path().join("r"))]);
    assert_eq!(out.status.code(), Some(1));
    let out = gfnn(&["train", "--dataset", path(&data), "--lr", "-1", "--out", path(&dir.path().join("r"))]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_dataset_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = gfnn(&["train", "--dataset", path(&dir.path().join("nowhere")), "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn generate_then_train_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("circles");
    let gen = gfnn(&["gen-two-circles", "--n", "300", "--train", "40", "--val", "40", "--seed", "3", "--out", path(&data)]);
    assert!(gen.status.success(), "{}", String::from_utf8_lossy(&gen.stderr));
    for file in ["meta.json", "edges.tsv", "features.csv", "labels.txt", "splits.json"] {
        assert!(data.join(file).exists(), "{file}");
    }
    let out = dir.path().join("run");
    let train = gfnn(&["train", "--dataset", path(&data), "--model", "gfnn", "--epochs", "20", "--bias", "--out", path(&out)]);
    assert!(train.status.success(), "{}", String::from_utf8_lossy(&train.stderr));
    let params = std::fs::read_to_string(out.join("params.json")).unwrap();
    let params = gfnn::models::ModelParams::from_json(&params).unwrap();
    assert!(params.has_bias());
    assert_eq!(params.input_dim(), 2);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["experiment"], "train");
    assert!(out.join("curves.csv").exists());
}

#[test]
fn identical_argv_gives_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<String> = ["a", "b"]
        .iter()
        .map(|name| {
            let out = dir.path().join(name);
            let status = gfnn(&[
                "two-circles", "--n", "300", "--train-size", "40", "--val-size", "40", "--epochs", "10",
                "--seeds", "0,1", "--out", path(&out),
            ]);
            assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
            std::fs::read_to_string(out.join("report.json")).unwrap()
        })
        .collect();
    assert_eq!(without_timestamp(&runs[0]), without_timestamp(&runs[1]));
    let strip = |s: &str| {
        s.lines()
            .filter(|l| !l.contains("\"timestamp\""))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&runs[0]), strip(&runs[1]));
}

#[test]
fn theory_check_on_a_triangle_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = gfnn(&["theory-check", "--graph", "k3", "--seeds", "0..4", "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("a-eigenvalues-shrink"));
}

#[test]
fn benchmark_without_data_reports_skips() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_gfnn"))
        .args(["benchmark", "--datasets", "cora", "--out", path(dir.path())])
        .env("GFNN_DATA_DIR", dir.path().join("empty"))
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["skipped"].as_array().unwrap().len(), 1);
}
