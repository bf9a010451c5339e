use std::path::Path;
use std::process::{Command, Output};

fn dynwalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dynwalk")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

const HIT_C4: &str = r#"{
  "id": "hit-c4",
  "kind": "hit",
  "seed": 5,
  "parameters": {
    "schedule": {"construction": "graph", "graph": "cycle", "n": 4},
    "starts": [0], "target": 2, "horizon": 1000, "trials": 2000
  }
}"#;

#[test]
fn unknown_kind_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.json", r#"{"id": "x", "kind": "teleport", "parameters": {}}"#);
    let out = dynwalk(&["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("kind"));
}

#[test]
fn unknown_parameter_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let text = HIT_C4.replace("\"trials\"", "\"trails\"");
    let cfg = write(dir.path(), "bad.json", &text);
    let out = dynwalk(&["hit", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("trails"));
}

#[test]
fn subcommand_must_match_kind() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "hit.json", HIT_C4);
    assert_eq!(dynwalk(&["cover", "--config", &cfg]).status.code(), Some(2));
    assert_eq!(dynwalk(&["hit", "--experiment", "no-such-id"]).status.code(), Some(2));
}

#[test]
fn missing_file_is_a_config_error() {
    assert_eq!(dynwalk(&["run", "--config", "/nonexistent/x.json"]).status.code(), Some(2));
}

#[test]
fn verify_lemmas_passes() {
    let out = dynwalk(&["verify-lemmas", "--experiment", "lemma-suite"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("experiment_id,check,checks,worst_margin,passed\n"));
    assert!(!csv.contains(",false\n"));
}

#[test]
fn reruns_are_byte_identical_and_seed_matters() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "hit.json", HIT_C4);
    let a = dynwalk(&["hit", "--config", &cfg]);
    let b = dynwalk(&["hit", "--config", &cfg, "--threads", "2"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = dynwalk(&["hit", "--config", &cfg, "--seed", "6"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn json_mirrors_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "hit.json", HIT_C4);
    let csv_path = dir.path().join("out.csv");
    let json_path = dir.path().join("out.json");
    for p in [&csv_path, &json_path] {
        let out = dynwalk(&["run", "--config", &cfg, "--out", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        assert!(out.stdout.is_empty());
    }
    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    let headers = reader.headers().unwrap().clone();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(&json_path).unwrap()).unwrap();
    let objs = json.as_array().unwrap();
    assert_eq!(rows.len(), objs.len());
    for (row, obj) in rows.iter().zip(objs) {
        for (h, v) in headers.iter().zip(row) {
            let j = &obj[h];
            let text = j.as_str().map_or_else(|| j.to_string(), str::to_string);
            assert_eq!(text, v, "column {h}");
        }
    }
}

#[test]
fn em_probe_flags() {
    let out = dynwalk(&["em", "probe", "--n", "30", "--p", "0.5", "--q", "0.5", "--samples", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("t,connected,lambda_star,t_rel,leq_C\n"));
    assert_eq!(csv.lines().count(), 4);
    let bad = dynwalk(&["em", "probe", "--n", "30", "--p", "1.5", "--q", "0.5", "--samples", "3"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn list_and_help() {
    let out = dynwalk(&["list"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("ot-consensus-20"));
    let help = String::from_utf8(dynwalk(&["--help"]).stdout).unwrap();
    for needle in ["construction", "parameters", "Exit codes"] {
        assert!(help.contains(needle), "{needle}");
    }
    assert_eq!(dynwalk(&["frobnicate"]).status.code(), Some(2));
}
