use std::path::Path;
use std::process::Command;

use viewlab::evalbench::{AttackSuiteConfig, BenchReport, DatasetManifest, DeskConfig, TrainingSuiteConfig};
use viewlab::gmvfool::AttackConfig;
use viewlab::viat::TrainConfig;

fn viewlab(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_viewlab")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = viewlab(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn tiny_desk() -> DeskConfig {
    DeskConfig {
        classes: 2,
        objects_per_class: 1,
        image_size: 8,
        clean_per_object: 4,
        eval_per_object: 2,
        pretrain_steps: 5,
        pretrain_batch: 4,
        ..Default::default()
    }
}

fn tiny_attack() -> AttackConfig {
    AttackConfig { k: 2, iterations: 2, samples: 4, entropy_samples: 10, ..Default::default() }
}

#[test]
fn library_pretrain_attack_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let lib = dir.path().join("library.json");
    let clf = dir.path().join("classifier.json");
    let run = dir.path().join("attack");
    ok(&["make-library", "--classes", "2", "--per-class", "2", "--out", p(&lib)]);
    ok(&["pretrain", "--library", p(&lib), "--steps", "5", "--image-size", "8", "--out", p(&clf)]);
    ok(&[
        "attack", "--scene", p(&lib), "--object", "3", "--classifier", p(&clf), "--K", "2", "--T", "3", "--q", "4",
        "--image-size", "8", "--eval-samples", "5", "--out", p(&run),
    ]);
    for f in ["distribution.json", "trace.csv", "summary.json"] {
        assert!(run.join(f).exists(), "{f}");
    }
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(run.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["queries"], 12);
    let trace = csv::Reader::from_path(run.join("trace.csv")).unwrap().into_records().count();
    assert_eq!(trace, 3);
}

#[test]
fn landscape_on_planted_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("grid.csv");
    ok(&["landscape", "--planted", "single", "--axes", "psi,phi", "--res", "12x6", "--out", p(&out)]);
    let mut rd = csv::Reader::from_path(&out).unwrap();
    assert_eq!(rd.headers().unwrap(), vec!["psi", "phi", "loss"]);
    assert_eq!(rd.records().count(), 72);
}

#[test]
fn unknown_axis_and_missing_files_fail() {
    let dir = tempfile::tempdir().unwrap();
    let out = viewlab(&["landscape", "--planted", "single", "--axes", "psi,zoom", "--out", p(&dir.path().join("g.csv"))]);
    assert!(!out.status.success());
    let out = viewlab(&["pretrain", "--library", p(&dir.path().join("absent.json"))]);
    assert!(!out.status.success());
    assert!(!viewlab(&["no-such-command"]).status.success());
}

#[test]
fn attack_bench_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = AttackSuiteConfig {
        desk: tiny_desk(),
        attack: tiny_attack(),
        components: vec![1, 2],
        samples_per_object: 4,
        entropy_samples: 10,
    };
    let cfg_path = dir.path().join("suite.json");
    std::fs::write(&cfg_path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let out = dir.path().join("bench");
    ok(&["bench", "--suite", "table4", "--config", p(&cfg_path), "--seed", "2", "--out", p(&out)]);
    let report: BenchReport =
        serde_json::from_str(&std::fs::read_to_string(out.join("table4.json")).unwrap()).unwrap();
    assert_eq!(report.seed, 2);
    assert_eq!(report.rows.len(), 3);
}

#[test]
fn training_bench_and_train_command() {
    let dir = tempfile::tempdir().unwrap();
    let train = TrainConfig {
        epochs: 2,
        steps_per_epoch: 2,
        batch_size: 8,
        full_iterations: 2,
        incremental_iterations: 1,
        attack: tiny_attack(),
        ..Default::default()
    };
    let suite = TrainingSuiteConfig {
        desk: tiny_desk(),
        train: train.clone(),
        eval_attack: tiny_attack(),
        eval_samples_per_object: 3,
    };
    let suite_path = dir.path().join("suite.json");
    std::fs::write(&suite_path, serde_json::to_string(&suite).unwrap()).unwrap();
    let bench = dir.path().join("bench");
    ok(&["bench", "--suite", "table2", "--config", p(&suite_path), "--out", p(&bench)]);
    let report: BenchReport =
        serde_json::from_str(&std::fs::read_to_string(bench.join("table2.json")).unwrap()).unwrap();
    assert_eq!(report.rows.len(), 4);

    let run_cfg = serde_json::json!({ "desk": tiny_desk(), "train": train, "checkpoints": true });
    let run_path = dir.path().join("run.json");
    std::fs::write(&run_path, run_cfg.to_string()).unwrap();
    let out = dir.path().join("train");
    ok(&["train", "--config", p(&run_path), "--seed", "3", "--out", p(&out)]);
    for f in ["standard.json", "classifier.json", "distribution_000.json", "library.json", "metrics.csv", "run.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    assert!(out.join("checkpoints/epoch_002/classifier.json").exists());
    assert_eq!(csv::Reader::from_path(out.join("metrics.csv")).unwrap().into_records().count(), 2);
}

#[test]
fn emit_dataset_command() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("data");
    ok(&[
        "emit-dataset", "--n", "3", "--classes", "2", "--per-class", "2", "--K", "2", "--T", "2", "--q", "4",
        "--image-size", "8", "--pretrain-steps", "5", "--out", p(&out),
    ]);
    let m: DatasetManifest = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m.entries.len(), 12);
    assert!(m.entries.iter().all(|e| out.join(&e.file).exists()));
}
