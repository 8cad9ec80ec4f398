use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_incompat"));
    cmd.env_remove("INCOMPAT_SEED");
    cmd
}

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn report(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

#[test]
fn robustness_of_sigma_xz_file() {
    let path = corpus_dir().join("sigma_xz.json");
    let r = report(&["robustness", "-i", path.to_str().unwrap()]);
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["command"], "robustness");
    let eta = r["result"]["eta"].as_f64().unwrap();
    assert!((eta - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6);
    assert_eq!(r["result"]["verdict"], "Incompatible");
    assert_eq!(r["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn classify_fully_compressible() {
    let r = report(&[
        "classify",
        "--builtin",
        "fully-compressible",
        "--n",
        "2",
        "--samples",
        "200",
        "--seed",
        "7",
    ]);
    assert_eq!(r["seed"], 7);
    assert_eq!(r["result"]["verdict"], "FullyCompressible");
}

#[test]
fn qubit_counterexample_coexists_without_parent() {
    let r = report(&["coexistence", "--builtin", "qubit-counterexample"]);
    let res = &r["result"];
    assert_eq!(res["coexistent"], true);
    assert_eq!(res["jm"], false);
    assert!((res["coarse_eta"].as_f64().unwrap() - 0.9830).abs() < 1e-3);
}

#[test]
fn bad_input_exits_with_2() {
    let out = run(&["robustness", "--builtin", "no-such-key"]);
    assert_eq!(out.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"dim": 2, "measurements": [{"elements": []}]}"#).unwrap();
    let out = run(&["robustness", "-i", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn solver_failure_exits_with_3() {
    let out = run(&[
        "robustness",
        "--builtin",
        "sigma-xz",
        "--sdp-max-iters",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn reruns_agree_except_timestamp() {
    let args = [
        "seesaw", "--dim", "2", "--ma", "2", "--mb", "2", "--seeds", "4", "--seed", "3",
    ];
    let mut a = report(&args);
    let mut b = report(&args);
    a["timestamp"] = Value::Null;
    b["timestamp"] = Value::Null;
    assert_eq!(a, b);
}

#[test]
fn output_flag_writes_file_and_text_format_works() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("r.json");
    let out = run(&["mub-check", "-o", out_path.to_str().unwrap()]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&std::fs::read(&out_path).unwrap()).unwrap();
    assert_eq!(v["command"], "mub-check");

    let out = run(&["robustness", "--builtin", "sigma-xz", "--format", "text"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("robustness (seed 0)"));
}

#[test]
fn exported_corpus_matches_shipped_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["export-corpus", "--dir", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let mut names: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(!names.is_empty());
    for name in names {
        let fresh: Value =
            serde_json::from_slice(&std::fs::read(dir.path().join(&name)).unwrap()).unwrap();
        let shipped: Value =
            serde_json::from_slice(&std::fs::read(corpus_dir().join(&name)).unwrap()).unwrap();
        assert_eq!(fresh, shipped, "{name:?} differs from the shipped corpus");
    }
}

#[test]
fn every_assemblage_in_corpus_is_accepted() {
    for entry in std::fs::read_dir(corpus_dir()).unwrap() {
        let path = entry.unwrap().path();
        let v: Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
        if v.get("measurements").is_none() {
            continue;
        }
        let r = report(&["jm", "-i", path.to_str().unwrap()]);
        assert!(r["result"].is_object(), "{}", path.display());
    }
}
