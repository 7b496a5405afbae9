use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const REFERENCE_ZEROS: [f64; 5] = [-0.217805, 6.29563e-2, 0.86095, 1.1636, 1.85076];

fn rabi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rabi"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

/// Data lines of a CSV document: no manifest comment, no header.
fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn csv_header(text: &str) -> String {
    text.lines()
        .find(|l| !l.starts_with('#'))
        .unwrap()
        .to_string()
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect()
}

#[test]
fn reference_spectrum_as_json() {
    let out = rabi(&[
        "spectrum", "--g", "0.7", "--delta", "0.4", "--omega", "1", "--xmin", "-0.5", "--xmax",
        "2", "--format", "json",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&out);
    let zeros = doc["result"]["zeros"].as_array().unwrap();
    assert_eq!(zeros.len(), 5);
    for (z, expected) in zeros.iter().zip(REFERENCE_ZEROS) {
        let x = z["x"].as_f64().unwrap();
        assert!((x - expected).abs() < 1e-5, "{x} vs {expected}");
    }
    assert_eq!(doc["diagnostics"]["failure_count"], 0);
}

#[test]
fn top_level_order_is_manifest_result_diagnostics() {
    let out = rabi(&["spectrum"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let m = text.find("\"manifest\"").unwrap();
    let r = text.find("\"result\"").unwrap();
    let d = text.find("\"diagnostics\"").unwrap();
    assert!(m < r && r < d);
}

#[test]
fn reversed_window_is_a_usage_error() {
    let out = rabi(&["spectrum", "--xmin", "2", "--xmax", "1"]);
    assert_eq!(code(&out), 1);
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn bad_flags_exit_one() {
    assert_eq!(code(&rabi(&["spectrum", "--frobnicate"])), 1);
    assert_eq!(code(&rabi(&["spectrum", "--format", "xml"])), 1);
    assert_eq!(code(&rabi(&["spectrum", "--method", "nope"])), 1);
    assert_eq!(code(&rabi(&["spectrum", "--g", "-1"])), 1);
    assert_eq!(code(&rabi(&["spectrum", "--pole-margin", "0.6"])), 1);
    assert_eq!(code(&rabi(&["evaluate", "--grid-points", "1"])), 1);
    assert_eq!(code(&rabi(&["spectrum", "--help"])), 0);
}

#[test]
fn unwritable_output_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("out.csv");
    let out = rabi(&["evaluate", "--output", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
}

#[test]
fn weak_coupling_zeros_near_splitting() {
    let out = rabi(&[
        "spectrum", "--g", "0.01", "--delta", "0.4", "--xmin", "-0.6", "--xmax", "0.8",
    ]);
    assert_eq!(code(&out), 0);
    let xs: Vec<f64> = json(&out)["result"]["zeros"]
        .as_array()
        .unwrap()
        .iter()
        .map(|z| z["x"].as_f64().unwrap())
        .collect();
    assert!(xs.iter().any(|x| (x + 0.4).abs() < 1e-3), "{xs:?}");
    assert!(xs.iter().any(|x| (x - 0.4).abs() < 1e-3), "{xs:?}");
}

#[test]
fn spectrum_methods_agree() {
    let reference: Vec<f64> =
        csv_rows(&String::from_utf8(rabi(&["spectrum", "--format", "csv"]).stdout).unwrap())
            .iter()
            .map(|r| r[0].parse().unwrap())
            .collect();
    for method in ["Gpm", "oracle", "f0"] {
        let out = rabi(&["spectrum", "--method", method, "--format", "csv"]);
        assert_eq!(code(&out), 0);
        let xs: Vec<f64> = csv_rows(&String::from_utf8(out.stdout).unwrap())
            .iter()
            .map(|r| r[0].parse().unwrap())
            .collect();
        assert_eq!(xs.len(), reference.len(), "{method}");
        for (a, b) in xs.iter().zip(&reference) {
            assert!((a - b).abs() < 1e-6, "{method}: {a} vs {b}");
        }
    }
    let euler = rabi(&["spectrum", "--ratio-method", "euler"]);
    assert_eq!(code(&euler), 0);
    assert_eq!(json(&euler)["manifest"]["extras"]["ratio_method"], "euler");
}

#[test]
fn two_point_grid_gives_two_rows() {
    let out = rabi(&["evaluate", "--grid-points", "2", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(csv_header(&text), "x,F0");
    assert_eq!(csv_rows(&text).len(), 2);
}

#[test]
fn baseline_rows_are_gaps() {
    let out = rabi(&[
        "evaluate",
        "--xmin",
        "0.5",
        "--xmax",
        "1.5",
        "--grid-points",
        "11",
        "--format",
        "csv",
    ]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l == "1.0,"), "{text}");
    for row in csv_rows(&text) {
        assert_eq!(row.len(), 2);
        let x: f64 = row[0].parse().unwrap();
        if (x - 1.0).abs() < 1e-9 {
            assert!(row[1].is_empty());
        } else {
            assert!(row[1].parse::<f64>().unwrap().is_finite());
        }
    }
}

#[test]
fn grid_sign_changes_sit_at_the_zeros() {
    let out = rabi(&["evaluate", "--grid-points", "2001"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    let changes = doc["diagnostics"]["sign_changes"].as_array().unwrap();
    assert_eq!(changes.len(), 5);
    for (pair, z) in changes.iter().zip(REFERENCE_ZEROS) {
        let pair = floats(pair);
        assert!(
            pair[0] - 1e-5 <= z && z <= pair[1] + 1e-5,
            "{z} not in {pair:?}"
        );
    }
    // elsewhere the raw value only flips across divergences of the ratio
    for pair in doc["diagnostics"]["pseudo_poles"].as_array().unwrap() {
        let pair = floats(pair);
        assert!(REFERENCE_ZEROS.iter().all(|z| (z - pair[0]).abs() > 1e-3));
    }
    assert_eq!(doc["result"].as_array().unwrap().len(), 2001);
}

#[test]
fn decoupled_oracle_levels() {
    let out = rabi(&["oracle", "--g", "0", "--levels", "6", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let rows = csv_rows(&String::from_utf8(out.stdout).unwrap());
    let expected = [-0.4, 0.4, 0.6, 1.4, 1.6, 2.4];
    assert_eq!(rows.len(), expected.len());
    for (row, e) in rows.iter().zip(expected) {
        let energy: f64 = row[1].parse().unwrap();
        assert!((energy - e).abs() < 1e-12, "{energy} vs {e}");
        assert_eq!(row[1], row[2], "x equals E when g = 0");
    }
}

#[test]
fn oracle_reproduces_reference_zeros() {
    let out = rabi(&["oracle", "--levels", "5"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    assert!(doc["result"]["n_fock"].as_u64().unwrap() <= 256);
    let levels = doc["result"]["levels"].as_array().unwrap();
    for (l, z) in levels.iter().zip(REFERENCE_ZEROS) {
        assert!((l["x"].as_f64().unwrap() - z).abs() < 1e-5);
    }
}

#[test]
fn oracle_cap_exceeded() {
    assert_eq!(code(&rabi(&["oracle", "--n-fock", "100000"])), 2);
    assert_eq!(code(&rabi(&["oracle", "--levels", "20000"])), 2);
}

#[test]
fn compare_within_tolerance() {
    let out = rabi(&["compare", "--tol", "1e-5"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    assert_eq!(doc["result"]["within_tol"], true);
    assert_eq!(doc["result"]["rows"].as_array().unwrap().len(), 5);
    assert!(doc["result"]["max_deviation"].as_f64().unwrap() <= 1e-5);
}

#[test]
fn compare_unreachable_tolerance() {
    let out = rabi(&["compare", "--tol", "1e-16"]);
    assert_eq!(code(&out), 2);
    // the table is still written
    assert_eq!(json(&out)["result"]["within_tol"], false);
}

#[test]
fn compare_with_gfunction_columns() {
    let out = rabi(&["compare", "--with-gfunction", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        csv_header(&text),
        "index,x_f0,x_oracle,dev_oracle,x_g,dev_g"
    );
    for row in csv_rows(&text) {
        assert_eq!(row.len(), 6);
        assert!(row[5].parse::<f64>().unwrap() <= 1e-6);
    }
    let plain = String::from_utf8(rabi(&["compare", "--format", "csv"]).stdout).unwrap();
    assert_eq!(csv_header(&plain), "index,x_f0,x_oracle,dev_oracle");
}

fn run_to_file(dir: &Path, name: &str, args: &[&str]) -> Vec<u8> {
    let path = dir.join(name);
    let mut full: Vec<&str> = args.to_vec();
    let p = path.to_str().unwrap().to_string();
    full.extend(["--output", &p]);
    let out = rabi(&full);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    std::fs::read(path).unwrap()
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["spectrum", "--xmax", "3.5"][..],
        &["evaluate", "--grid-points", "301", "--format", "csv"][..],
        &["compare", "--with-gfunction"][..],
    ] {
        // same manifest, so same output path
        let a = run_to_file(dir.path(), "out", args);
        let b = run_to_file(dir.path(), "out", args);
        assert!(!a.is_empty());
        assert!(a == b, "{args:?} differs between runs");
    }
}

#[test]
fn manifest_echoes_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spec.json");
    let p = path.to_str().unwrap();
    let out = rabi(&["spectrum", "--output", p]);
    assert_eq!(code(&out), 0);
    let doc: Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    let m = &doc["manifest"];
    assert_eq!(m["subcommand"], "spectrum");
    assert_eq!(m["params"]["g"], 0.7);
    assert_eq!(m["params"]["delta"], 0.4);
    assert_eq!(m["params"]["omega"], 1.0);
    assert_eq!(m["cfg"]["xmin"], -0.5);
    assert_eq!(m["cfg"]["xmax"], 2.0);
    assert_eq!(m["cfg"]["grid_per_unit"], 200);
    assert_eq!(m["cfg"]["pole_margin"], 1e-6);
    assert_eq!(m["cfg"]["root_tol"], 1e-10);
    assert_eq!(m["tolerances"]["rel_tol"], 1e-12);
    assert_eq!(m["output_path"], p);
    assert_eq!(m["format"], "json");
    assert_eq!(m["extras"]["method"], "F0");

    let csv =
        String::from_utf8(rabi(&["oracle", "--levels", "3", "--format", "csv"]).stdout).unwrap();
    let echo: Value =
        serde_json::from_str(csv.lines().next().unwrap().trim_start_matches("# ")).unwrap();
    assert_eq!(echo["subcommand"], "oracle");
    assert_eq!(echo["extras"]["levels"], 3);
    assert_eq!(echo["output_path"], "-");
}
