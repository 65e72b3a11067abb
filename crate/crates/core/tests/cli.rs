//! Black-box tests of the command-line interface: exit codes, output
//! shape, and byte-level reproducibility.

use std::path::Path;
use std::process::Command;

fn run(args: &[&str]) -> (i32, String) {
    let output = Command::new(env!("CARGO_BIN_EXE_clustergas"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        output.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&output.stderr).into_owned(),
    )
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

const COUNT_CONFIG: &str = r#"{"instance": {"sizes": [1, 1], "n_list": [0, 1]}}"#;

#[test]
fn count_forests_matches_formula() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "c.json", COUNT_CONFIG);
    let out = dir.path().join("out.csv");
    let (code, err) = run(&["count-forests", "--config", &config, "--output", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("2,\"1,1\",1,3,3"), "{text}");
    assert!(text.starts_with("# clustergas"));
    assert!(text.contains("# config:"));
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "bad.json", r#"{"caps": {"bogus_key": 1}}"#);
    let out = dir.path().join("out.csv");
    let (code, err) =
        run(&["count-forests", "--config", &config, "--output", out.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("bogus_key"), "{err}");
}

#[test]
fn missing_instance_field_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "c.json", r#"{"instance": {"n": 1}}"#);
    let out = dir.path().join("out.csv");
    let (code, err) =
        run(&["count-forests", "--config", &config, "--output", out.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("sizes"), "{err}");
}

#[test]
fn vertex_cap_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "c.json",
        r#"{"instance": {"sizes": [4, 4, 4], "n": 3}, "caps": {"vertex_cap": 10}}"#,
    );
    let out = dir.path().join("out.csv");
    let (code, err) =
        run(&["count-forests", "--config", &config, "--output", out.to_str().unwrap()]);
    assert_eq!(code, 3, "{err}");
}

#[test]
fn verify_identities_all_rows_ok() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "c.json", "{}");
    let out = dir.path().join("out.csv");
    let (code, err) =
        run(&["verify-identities", "--config", &config, "--output", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let text = std::fs::read_to_string(&out).unwrap();
    for line in text.lines().filter(|l| !l.starts_with('#') && !l.starts_with("identity")) {
        assert!(line.ends_with(",true"), "{line}");
    }
}

const PTCF_CONFIG: &str = r#"{
  "potential": {"kind": {"family": "custom", "hard_core": 0.5, "table": [[0.5, 0.0]]}, "d": 1},
  "model": {"beta": 1.0, "z": 0.03, "box": {"lo": [-4.0], "hi": [4.0]}},
  "caps": {"n_max": 2, "points_per_axis": 24},
  "instance": {"clusters": [[[-0.2]], [[0.2]]], "route": "forest_series"}
}"#;

#[test]
fn compute_ptcf_reports_value_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "c.json", PTCF_CONFIG);
    let out = dir.path().join("out.json");
    let (code, err) =
        run(&["compute-ptcf", "--config", &config, "--output", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let record: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(record["value"].as_f64().unwrap() < 0.0);
    assert!(record["error"].as_f64().unwrap() > 0.0);
    assert_eq!(record["route"], "forest_series");
    assert_eq!(record["rigorous"], true);
    assert_eq!(record["config"]["model"]["z"], 0.03);
}

#[test]
fn flag_overrides_are_recorded_and_applied() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "c.json", PTCF_CONFIG);
    let out = dir.path().join("out.json");
    let (code, err) = run(&[
        "compute-ptcf",
        "--config",
        &config,
        "--output",
        out.to_str().unwrap(),
        "--z",
        "0.05",
        "--n-max",
        "1",
        "--threads",
        "4",
    ]);
    assert_eq!(code, 0, "{err}");
    let record: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(record["config"]["model"]["z"], 0.05);
    assert_eq!(record["config"]["caps"]["n_max"], 1);
    assert_eq!(record["config"]["caps"]["threads"], 4);
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "c.json", PTCF_CONFIG);
    let out_a = dir.path().join("a.json");
    let out_b = dir.path().join("b.json");
    for out in [&out_a, &out_b] {
        let (code, err) = run(&[
            "compute-ptcf",
            "--config",
            &config,
            "--output",
            out.to_str().unwrap(),
            "--seed",
            "42",
        ]);
        assert_eq!(code, 0, "{err}");
    }
    assert_eq!(std::fs::read(&out_a).unwrap(), std::fs::read(&out_b).unwrap());
}

#[test]
fn resum_check_passes() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "c.json",
        r#"{
  "potential": {"kind": {"family": "custom", "hard_core": 0.5, "table": [[0.5, 0.0]]}, "d": 1},
  "model": {"beta": 1.0, "z": 0.5, "box": {"lo": [-0.5], "hi": [0.5]}},
  "caps": {"n_max": 3, "points_per_axis": 6}
}"#,
    );
    let out = dir.path().join("out.csv");
    let (code, err) =
        run(&["resum-check", "--config", &config, "--output", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().filter(|l| l.ends_with(",true")).count(), 3);
}
