use std::f64::consts::FRAC_PI_2;
use std::path::PathBuf;

use geocut_cli::{run, EXIT_FAILED, EXIT_OK, EXIT_USAGE};
use serde_json::Value;

fn call(args: &[&str]) -> (i32, Value) {
    let out = run(std::iter::once("geocut").chain(args.iter().copied()));
    let doc = serde_json::from_str(&out.stdout).unwrap_or_else(|e| panic!("{args:?}: {e}\n{}", out.stdout));
    (out.status, doc)
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../docs/schemas").join(format!("{name}.json"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

fn assert_valid(name: &str, doc: &Value) {
    let v = schema(name);
    let errors: Vec<String> = v.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{name}: {errors:?}\n{doc}");
}

#[test]
fn verify_lens_three() {
    let (status, doc) = call(&["verify-lens", "3"]);
    assert_eq!(status, EXIT_OK);
    assert_eq!(doc["violations"], 0);
    assert!(doc["trig_min_margin"].as_f64().unwrap() > 0.0);
    assert_eq!(doc["covering"]["C1"], 2);
    assert_eq!(doc["covering"]["Cp-1"], 3);
    assert_eq!(doc["passed"], true);
    assert_valid("verify-lens", &doc);
}

#[test]
fn bounds_builtin() {
    let (status, doc) = call(&["bounds", "--builtin", "gr2c4"]);
    assert_eq!(status, EXIT_OK);
    assert_eq!(doc["result"], 16);
    assert_eq!(doc["trace"], serde_json::json!([8, 7, "+1"]));
    assert_valid("bounds", &doc);
    for n in 1..=10 {
        let (_, doc) = call(&["bounds", "--builtin", &format!("cpn({n})")]);
        assert_eq!(doc["result"], 2 * n + 1);
    }
}

#[test]
fn bounds_from_descriptions() {
    let (status, doc) = call(&["bounds", "--json", r#"{"rank": 2, "groups": {"1": [7, 5], "2": [8]}}"#]);
    assert_eq!(status, EXIT_OK);
    assert_eq!(doc["result"], 16);
    let (_, doc) = call(&["bounds", "--json", r#"{"secat": [3, 4]}"#]);
    assert_eq!(doc["result"], 8);
    assert_valid("bounds", &doc);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("groups.json");
    std::fs::write(&path, r#"{"groups": {"1": [4]}}"#).unwrap();
    let (status, doc) = call(&["bounds", "--input", path.to_str().unwrap()]);
    assert_eq!(status, EXIT_OK);
    assert_eq!(doc["result"], 5);

    for bad in [r#"{"rank": 2, "groups": {"1": [7]}}"#, r#"{"secat": []}"#, "[1]", "{", r#"{"groups": {"1": [0]}}"#] {
        let (status, doc) = call(&["bounds", "--json", bad]);
        assert_eq!(status, EXIT_USAGE, "{bad}");
        assert_valid("error", &doc);
    }
    let (status, _) = call(&["bounds", "--builtin", "so(5)"]);
    assert_eq!(status, EXIT_USAGE);
}

#[test]
fn plan_on_the_p_geodesic_stratum() {
    let (status, doc) = call(&["plan", "lens3", "--from", "1,0,0,0", "--to", "0,0,1,0"]);
    assert_eq!(status, EXIT_OK);
    assert!((doc["length"].as_f64().unwrap() - FRAC_PI_2).abs() < 1e-12);
    assert_eq!(doc["stratum"]["tag"], "lens_cp_minus1");
    assert_eq!(doc["piece"]["kind"]["kind"], "lens_frame");
    assert_eq!(doc["samples"].as_array().unwrap().len(), 64);
    assert_valid("plan", &doc);
}

#[test]
fn inputs_are_normalized_and_echoed() {
    let (_, doc) = call(&["classify", "cp1", "--from", "2,0,0,0", "--to", "0,0,0,-3"]);
    assert_eq!(doc["x"], serde_json::json!([1.0, 0.0, 0.0, 0.0]));
    // The canonical lift makes the leading nonzero complex coordinate real positive.
    assert!((doc["y"][2].as_f64().unwrap() - 1.0).abs() < 1e-15);
    assert_eq!(doc["stratum"]["tag"], "projective_cut");
    assert_valid("classify", &doc);
    assert_eq!(doc["config"]["tie_tol"], 1e-9);
    assert_eq!(doc["config"]["seed"], 0);
}

#[test]
fn every_command_validates() {
    let cases: &[(&str, &[&str])] = &[
        ("classify", &["classify", "lens5", "--from", "1,0,0,0", "--to", "0,1,0,0"]),
        ("geodesics", &["geodesics", "s2", "--from", "1,0,0", "--to", "-1,0,0"]),
        ("geodesics", &["geodesics", "cp2", "--from", "1,0,0,0,0,0", "--to", "0,0,0,0,1,0"]),
        ("geodesics", &["geodesics", "lens4", "--from", "1,0,0,0", "--to", "0,0,1,0"]),
        ("cut-time", &["cut-time", "hp1", "--at", "1,0,0,0,0,0,0,0", "--velocity", "0,1,0,0,1,0,0,0"]),
        ("cut-time", &["cut-time", "lens3", "--at", "1,0,0,0", "--velocity", "0,1,0,0"]),
        ("oracle", &["oracle", "cp1", "--from", "1,0,0,0", "--to", "0,0,1,0"]),
        ("oracle", &["oracle", "lens5", "--from", "1,0,0,0", "--to", "0,0,1,0"]),
        ("decompose", &["decompose", "s3", "--samples", "10"]),
        ("decompose", &["decompose", "hp1", "--samples", "10"]),
        ("verify-lens", &["verify-lens", "7", "--samples", "500"]),
        ("plan", &["plan", "s2", "--from", "0,0,1", "--to", "0,0,-1", "--samples", "5"]),
        ("plan", &["plan", "cp2", "--from", "1,0,0,0,0,0", "--to", "0,0,1,0,0,0"]),
    ];
    for (name, args) in cases {
        let (status, doc) = call(args);
        assert_eq!(status, EXIT_OK, "{args:?}\n{doc}");
        assert_valid(name, &doc);
    }
}

#[test]
fn cut_time_values() {
    let (_, doc) = call(&["cut-time", "lens3", "--at", "1,0,0,0", "--velocity", "0,1,0,0"]);
    assert!((doc["cut_time"].as_f64().unwrap() - std::f64::consts::FRAC_PI_3).abs() < 1e-12);
    // The vertical part of a projective velocity is discarded.
    let (_, doc) = call(&["cut-time", "cp1", "--at", "1,0,0,0", "--velocity", "0,5,1,0"]);
    assert!((doc["cut_time"].as_f64().unwrap() - FRAC_PI_2).abs() < 1e-12);
    assert_eq!(doc["velocity"], serde_json::json!([0.0, 0.0, 1.0, 0.0]));
}

#[test]
fn usage_errors_exit_two() {
    let cases: &[&[&str]] = &[
        &["plan", "lens3", "--from", "1,0,0", "--to", "0,0,1,0"],
        &["plan", "lens2", "--from", "1,0,0,0", "--to", "0,0,1,0"],
        &["plan", "torus", "--from", "1,0", "--to", "0,1"],
        &["plan", "s2", "--from", "0,0,0", "--to", "1,0,0"],
        &["plan", "s2", "--from", "a,b,c", "--to", "1,0,0"],
        &["classify", "s2", "--from", "1,0,0", "--to", "0,1,0", "--csv", "out.csv"],
        &["cut-time", "cp1", "--at", "1,0,0,0", "--velocity", "0,1,0,0"],
        &["verify-lens", "2"],
        &["bounds"],
        &["frobnicate"],
        &["plan", "s2", "--from", "1,0,0"],
        &["--tie-tol", "-1", "classify", "s2", "--from", "1,0,0", "--to", "0,1,0"],
    ];
    for args in cases {
        let (status, doc) = call(args);
        assert_eq!(status, EXIT_USAGE, "{args:?}\n{doc}");
        assert_valid("error", &doc);
    }
}

#[test]
fn failed_verification_exits_one_with_data() {
    // A tie tolerance this coarse misplaces near-cut pairs, so the sampled validation fails.
    let (status, doc) = call(&["decompose", "lens3", "--samples", "20", "--tie-tol", "0.1"]);
    assert_eq!(status, EXIT_FAILED);
    assert_eq!(doc["passed"], false);
    assert!(doc.get("error").is_none());
    assert_valid("decompose", &doc);
}

#[test]
fn help_and_version_exit_zero() {
    for flag in ["--help", "--version"] {
        let out = run(["geocut", flag]);
        assert_eq!(out.status, EXIT_OK);
        assert!(!out.stdout.is_empty());
    }
}

#[test]
fn output_and_csv_files() {
    let dir = tempfile::tempdir().unwrap();
    let json_path = dir.path().join("plan.json");
    let csv_path = dir.path().join("plan.csv");
    let args = [
        "geocut",
        "plan",
        "s2",
        "--from",
        "1,0,0",
        "--to",
        "0,1,0",
        "--samples",
        "5",
        "--output",
        json_path.to_str().unwrap(),
        "--csv",
        csv_path.to_str().unwrap(),
    ];
    let out = run(args);
    assert_eq!(out.status, EXIT_OK);
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_valid("plan", &doc);
    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    assert_eq!(reader.headers().unwrap().iter().collect::<Vec<_>>(), ["index", "c0", "c1", "c2"]);
    let rows: Vec<Vec<f64>> = reader
        .records()
        .map(|r| r.unwrap().iter().skip(1).map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 5);
    let samples = doc["samples"].as_array().unwrap();
    for (row, s) in rows.iter().zip(samples) {
        let s: Vec<f64> = s.as_array().unwrap().iter().map(|c| c.as_f64().unwrap()).collect();
        assert_eq!(row, &s);
    }
}

#[test]
fn floats_round_trip_through_output() {
    let out = run(["geocut", "classify", "lens3", "--from", "1,0,0,0", "--to", "0.3,0.4,0.5,0.6"]);
    let doc: Value = serde_json::from_str(&out.stdout).unwrap();
    let d = doc["distance"].as_f64().unwrap();
    let m: geocut::ModelManifold = "lens3".parse().unwrap();
    let x = m.point_normalized(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
    let y = m.point_normalized(vec![0.3, 0.4, 0.5, 0.6]).unwrap();
    assert_eq!(d, m.distance(&x, &y).unwrap());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let cases: &[&[&str]] = &[
        &["geocut", "plan", "lens5", "--from", "1,0,0,0", "--to", "0.1,0.2,0.9,-0.3"],
        &["geocut", "verify-lens", "4", "--samples", "300", "--seed", "11"],
        &["geocut", "decompose", "cp1", "--samples", "10", "--seed", "3"],
        &["geocut", "oracle", "lens3", "--from", "1,0,0,0", "--to", "0,1,0,0"],
    ];
    for args in cases {
        assert_eq!(run(args.iter().copied()), run(args.iter().copied()), "{args:?}");
    }
}
