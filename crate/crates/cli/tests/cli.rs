use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mutacyc_core::proof::enumerate_weight2_rank4;
use mutacyc_core::{Encoding, LabeledDataset};

fn mutacyc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mutacyc"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const TORUS: &str = "[[0,1,1,-1],[-1,0,-1,2],[-1,1,0,-1],[1,-2,1,0]]";
const A4: &str = "[[0,1,0,0],[-1,0,1,0],[0,-1,0,1],[0,0,-1,0]]";

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(mutacyc(dir.path(), &[]).status.code(), Some(1));
    assert_eq!(mutacyc(dir.path(), &["gen", "7"]).status.code(), Some(1));
    assert_eq!(
        mutacyc(dir.path(), &["svm", "--dataset", "missing.csv"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(mutacyc(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn shallow_proof_leaves_classes_undetermined() {
    let dir = tempfile::tempdir().unwrap();
    let o = mutacyc(
        dir.path(),
        &[
            "prove",
            "--out",
            "l.jsonl",
            "--max-nma-seed-depth",
            "1",
            "--max-resolve-depth",
            "1",
        ],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("isomorphism classes                        667"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("undetermined: "));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("l.jsonl.summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["total_classes"], 667);
    assert!(summary["undetermined"].as_u64().unwrap() > 0);
    assert_eq!(
        fs::read_to_string(dir.path().join("l.jsonl"))
            .unwrap()
            .lines()
            .count(),
        667
    );
}

#[test]
fn generation_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a.csv", "b.csv"] {
        let o = mutacyc(dir.path(), &["gen", "2", "--out", out]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).contains("[7285, 2914]"));
    }
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    let b = fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
    let manifest = |f: &str| -> serde_json::Value {
        serde_json::from_str(&fs::read_to_string(dir.path().join(f)).unwrap()).unwrap()
    };
    assert_eq!(
        manifest("a.csv.manifest.json")["sha256"],
        manifest("b.csv.manifest.json")["sha256"]
    );
}

#[test]
fn dataset4_requires_a_ledger() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(mutacyc(dir.path(), &["gen", "4"]).status.code(), Some(1));
}

#[test]
fn exact_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let o = mutacyc(dir.path(), &["predict", A4, "--exact"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("MA (acyclic witness)"));

    let o = mutacyc(dir.path(), &["predict", TORUS, "--exact"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("NMA ("), "{}", stdout(&o));

    fs::write(dir.path().join("q.json"), format!("{{\"n\":4,\"b\":{A4}}}")).unwrap();
    assert!(stdout(&mutacyc(dir.path(), &["predict", "q.json", "--exact"])).starts_with("MA"));

    let not_skew = "[[0,1,0,0],[1,0,1,0],[0,-1,0,1],[0,0,-1,0]]";
    assert_eq!(
        mutacyc(dir.path(), &["predict", not_skew, "--exact"])
            .status
            .code(),
        Some(1)
    );

    let k4 = "[[0,-1,-1,-1],[1,0,-1,1],[1,1,0,-1],[1,-1,1,0]]";
    let o = mutacyc(dir.path(), &["predict", k4, "--exact", "--depth", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).starts_with("Undetermined"));
}

/// Weight-2 quivers labeled by a quadratic threshold.
fn write_small_dataset(path: &Path) {
    let mut ds = LabeledDataset::new(Encoding::Upper6);
    for q in enumerate_weight2_rank4().connected.iter().step_by(13) {
        let norm: i64 = q.upper().iter().map(|v| v * v).sum();
        ds.push(q, u8::from(norm > 8)).unwrap();
    }
    ds.save(path).unwrap();
}

#[test]
fn svm_writes_model_metrics_and_expansion() {
    let dir = tempfile::tempdir().unwrap();
    write_small_dataset(&dir.path().join("small.csv"));
    let o = mutacyc(
        dir.path(),
        &[
            "svm",
            "--dataset",
            "small.csv",
            "--out-dir",
            "out",
            "--degree",
            "2",
            "--c",
            "100",
            "--weight-nma",
            "1",
            "--expand",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let metrics: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/metrics.json")).unwrap())
            .unwrap();
    assert!(metrics["test"]["mcc"].as_f64().unwrap() > 0.9, "{metrics}");
    assert!(metrics["terms"].as_u64().unwrap() <= 22);
    let csv = fs::read_to_string(dir.path().join("out/expansion.csv")).unwrap();
    assert_eq!(
        csv.lines().count() as u64,
        metrics["terms"].as_u64().unwrap() + 1
    );

    let o = mutacyc(dir.path(), &["predict", A4, "--model", "out/model.json"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("SVM decision"));
}

#[test]
fn saved_configuration_replays_identically() {
    let dir = tempfile::tempdir().unwrap();
    write_small_dataset(&dir.path().join("small.csv"));
    let o = mutacyc(
        dir.path(),
        &[
            "--save-config",
            "run.json",
            "nn",
            "--dataset",
            "small.csv",
            "--out-dir",
            "a",
            "--epochs",
            "3",
            "--runs",
            "2",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let first = stdout(&o);
    assert!(first.contains("mean accuracy"));
    let again = mutacyc(dir.path(), &["replay", "run.json", "--threads", "2"]);
    assert!(
        again.status.success(),
        "{}",
        String::from_utf8_lossy(&again.stderr)
    );
    assert_eq!(stdout(&again), first);
    assert_eq!(
        fs::read_to_string(dir.path().join("a/history-2.csv"))
            .unwrap()
            .lines()
            .count(),
        4
    );
    fs::write(
        dir.path().join("nested.json"),
        r#"{"threads":null,"command":{"subcommand":"replay","config":"run.json"}}"#,
    )
    .unwrap();
    assert_eq!(
        mutacyc(dir.path(), &["replay", "nested.json"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn pca_outputs() {
    let dir = tempfile::tempdir().unwrap();
    write_small_dataset(&dir.path().join("small.csv"));
    let o = mutacyc(
        dir.path(),
        &[
            "pca",
            "--dataset",
            "small.csv",
            "--out-dir",
            "p",
            "--dims",
            "3",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let proj = fs::read_to_string(dir.path().join("p/projection.csv")).unwrap();
    assert_eq!(proj.lines().next(), Some("pc1,pc2,pc3,label"));
    assert_eq!(stdout(&o).lines().count(), 7);
}
