use std::path::{Path, PathBuf};

use qlowdeg::cli::{run_cli, EXIT_AUDIT, EXIT_OK, EXIT_PARSE, EXIT_RESOURCE};
use serde_json::Value;

fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/schemas")
}

fn run(args: &[&str], out: &Path) -> i32 {
    let mut full = vec!["qlowdeg"];
    full.extend_from_slice(args);
    let out = out.to_str().unwrap();
    full.extend_from_slice(&["--out", out]);
    run_cli(full)
}

fn run_json(args: &[&str]) -> (i32, Value) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let code = run(args, &path);
    let text = std::fs::read_to_string(&path).unwrap_or_default();
    (code, serde_json::from_str(&text).unwrap_or(Value::Null))
}

fn run_csv(args: &[&str]) -> (i32, String) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let mut a = args.to_vec();
    a.extend_from_slice(&["--format", "csv"]);
    let code = run(&a, &path);
    (code, std::fs::read_to_string(&path).unwrap_or_default())
}

fn validate(name: &str, value: &Value) {
    let text = std::fs::read_to_string(schema_dir().join(format!("{name}.schema.json"))).unwrap();
    let schema: Value = serde_json::from_str(&text).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(value).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{name}: {errors:#?}");
}

const CASES: [(&str, &[&str]); 8] = [
    ("advantage", &["advantage", "--ensemble", "stabilizer:n=1", "--plan", "random-local,m=2", "--k", "2", "--seed", "1", "--audit", "local"]),
    ("advantage", &["advantage", "--ensemble", "haar:n=1", "--plan", "comp-basis,m=2", "--k", "2", "--d-per-copy", "1", "--mode", "mc", "--samples", "500", "--seed", "1"]),
    ("design-check", &["design-check", "--ensemble", "stabilizer:n=1", "--k", "4", "--seed", "1"]),
    ("biclique-power", &["biclique-power", "--n", "8,12", "--lambda", "2,8", "--trials", "20", "--seed", "1"]),
    ("biclique-mass", &["biclique-mass", "--n", "2", "--lambda", "1.5", "--k", "3", "--plan", "random", "--seed", "1"]),
    ("mitigation", &["mitigation", "--n", "3", "--l", "2", "--trials", "30", "--seed", "1"]),
    ("haar-verify", &["haar-verify", "--t-max", "3", "--w-max", "3", "--seed", "1"]),
    ("list", &["list"]),
];

#[test]
fn outputs_match_schemas_and_csv_has_header() {
    for (name, args) in CASES {
        let (code, v) = run_json(args);
        assert_eq!(code, EXIT_OK, "{args:?}");
        validate(name, &v);
        let (code, csv) = run_csv(args);
        assert_eq!(code, EXIT_OK, "{args:?}");
        let header = csv.lines().next().unwrap_or("");
        assert!(!header.is_empty() && header.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == ','), "{name}: {header}");
        let cols = header.split(',').count();
        for line in csv.lines().skip(1) {
            assert_eq!(line.split(',').count(), cols, "{name}: ragged row {line}");
        }
    }
}

#[test]
fn stabilizer_three_design() {
    let (code, v) = run_json(&["design-check", "--ensemble", "stabilizer:n=1", "--k", "3", "--mode", "exact", "--seed", "0"]);
    assert_eq!(code, EXIT_OK);
    assert!(v["report"]["epsilon"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn zero_state_degree_one() {
    let (code, v) = run_json(&[
        "advantage", "--ensemble", "point:zero-state,n=1", "--plan", "comp-basis,m=1", "--k", "1", "--mode", "exact", "--seed", "0",
    ]);
    assert_eq!(code, EXIT_OK);
    assert!((v["report"]["total"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    assert_eq!(run(&["advantage", "--ensemble", "haar:n=1,dd=2", "--seed", "1"], &out), EXIT_PARSE);
    assert_eq!(run(&["advantage", "--ensemble", "haar:n=1"], &out), EXIT_PARSE);
    assert_eq!(run(&["advantage", "--ensemble", "haar:n=1", "--mode", "fast", "--seed", "1"], &out), EXIT_PARSE);
    assert_eq!(run(&["biclique-mass", "--n", "3", "--k", "9", "--seed", "1"], &out), EXIT_RESOURCE);
    assert_eq!(run(&["advantage", "--ensemble", "haar:n=13", "--seed", "1"], &out), EXIT_RESOURCE);
    // A vanishing budget constant makes the mass audit fail, but the table is still written.
    assert_eq!(run(&["biclique-mass", "--n", "2", "--lambda", "2", "--budget-constant", "1e-9", "--seed", "1"], &out), EXIT_AUDIT);
    assert!(out.exists());
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"command": "design-check", "seed": 4, "ensemble": "stabilizer:n=1", "k": 4, "format": "json"}"#).unwrap();
    let out = dir.path().join("o.json");
    let cfg_s = cfg.to_str().unwrap();
    assert_eq!(run(&["design-check", "--config", cfg_s], &out), EXIT_OK);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["report"]["k"], 4);
    assert_eq!(v["seed"], 4);
    assert_eq!(run(&["design-check", "--config", cfg_s, "--k", "3"], &out), EXIT_OK);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["report"]["k"], 3);
    // Wrong subcommand, unknown field, broken JSON.
    assert_eq!(run(&["advantage", "--config", cfg_s], &out), EXIT_PARSE);
    std::fs::write(&cfg, r#"{"seed": 4, "ensemble": "haar", "kk": 2}"#).unwrap();
    assert_eq!(run(&["design-check", "--config", cfg_s], &out), EXIT_PARSE);
    std::fs::write(&cfg, "{\"seed\": 4,\n").unwrap();
    assert_eq!(run(&["design-check", "--config", cfg_s], &out), EXIT_PARSE);
}

#[test]
fn config_validates_against_schema() {
    let v: Value = serde_json::json!({
        "command": "biclique-power", "seed": 3, "format": "csv", "threads": 2,
        "n": [16, 32], "lambda": [4.0, 8.0], "detector": "swap", "trials": 50
    });
    validate("config", &v);
}

#[test]
fn list_contents() {
    let (code, v) = run_json(&["list"]);
    assert_eq!(code, EXIT_OK);
    let names: Vec<&str> = v["entries"].as_array().unwrap().iter().map(|e| e["name"].as_str().unwrap()).collect();
    for want in ["haar", "stabilizer", "brickwork", "gibbs-gue", "gibbs-rsps", "biclique", "edge-count"] {
        assert!(names.contains(&want), "{want}");
    }
    let (_, all) = run_json(&["list", ""]);
    assert_eq!(all["entries"], v["entries"]);
    let (_, gibbs) = run_json(&["list", "gibbs"]);
    assert_eq!(gibbs["entries"].as_array().unwrap().len(), 2);
}
