use std::path::Path;
use std::process::{Command, Output};

use mellin_core::catalog::Catalog;
use serde_json::{json, Value};

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mellin-sio"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, value: &Value) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path.to_string_lossy().into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn identities_pass_and_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let first = run(dir.path(), &["identities", "--grid-n", "512"]);
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stdout));
    let report_path = dir.path().join("identities.json");
    let bytes = std::fs::read(&report_path).unwrap();
    let report: Value = serde_json::from_slice(&bytes).unwrap();
    let names: Vec<&str> = report["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert_eq!(
        names,
        ["mellin_gaussian", "mellin_round_trip", "symbol_identities", "projection_cross", "projection_square", "conv_vs_pv"]
    );
    assert!(dir.path().join("timing/identities.json").exists());
    assert!(std::fs::read_dir(dir.path().join("cache")).unwrap().count() == 1);

    let second = run(dir.path(), &["identities", "--grid-n", "512"]);
    assert_eq!(second.status.code(), Some(0));
    assert_eq!(std::fs::read(&report_path).unwrap(), bytes, "report differs between runs");
}

#[test]
fn corrupted_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\n  \"seed\": 3,\n  \"grdi\": {}\n}\n").unwrap();
    let out = run(dir.path(), &["identities", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("grdi") && err.contains("line 3"), "{err}");

    let cfg = write_config(dir.path(), &json!({ "suites": { "pdo": ["no_such_check"] } }));
    let out = run(dir.path(), &["pdo", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn violating_fixture_fails_ellipticity() {
    let dir = tempfile::tempdir().unwrap();
    let mut catalog = serde_json::to_value(Catalog::default()).unwrap();
    catalog["pairs"] = json!([catalog["violating"].clone()]);
    let cfg = write_config(
        dir.path(),
        &json!({ "catalog": catalog, "suites": { "index": ["ellipticity"] } }),
    );
    let out = run(dir.path(), &["index", "--grid-n", "256", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stdout));
    let report = read_json(&dir.path().join("index.json"));
    let check = &report["checks"][0];
    assert_eq!(check["pass"], json!(false));
    assert!(check["note"].as_str().unwrap().contains("μ ="), "{check}");
}

#[test]
fn report_merges_idempotently_and_emits_plots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &json!({
            "suites": {
                "identities": ["mellin_gaussian", "symbol_identities"],
                "pdo": ["root_test"],
                "index": ["disk_f", "fiber_factorization"]
            }
        }),
    );
    for suite in ["identities", "pdo", "index"] {
        let out = run(dir.path(), &[suite, "--grid-n", "256", "--config", &cfg]);
        assert_eq!(out.status.code(), Some(0), "{suite}: {}", String::from_utf8_lossy(&out.stdout));
    }
    let out = run(dir.path(), &["report"]);
    assert_eq!(out.status.code(), Some(0));
    let summary_path = dir.path().join("summary.json");
    let once = std::fs::read(&summary_path).unwrap();
    let summary: Value = serde_json::from_slice(&once).unwrap();
    assert_eq!(summary["suites"].as_object().unwrap().len(), 3);

    let copy = dir.path().join("summary-copy.json");
    std::fs::copy(&summary_path, &copy).unwrap();
    let out = run(dir.path(), &["report", copy.to_str().unwrap(), copy.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read(&summary_path).unwrap(), once);

    let loop_csv = std::fs::read_to_string(dir.path().join("plots/index/boundary_loop_h.csv")).unwrap();
    let rows: Vec<&str> = loop_csv.lines().skip(1).collect();
    let tail = |row: &str| row.split(',').skip(1).collect::<Vec<_>>().join(",");
    assert_eq!(tail(rows[0]), tail(rows[rows.len() - 1]), "loop is not closed");
    assert!(dir.path().join("plots/identities/symbols_y2.csv").exists());
    assert!(dir.path().join("plots/pdo/root_test.csv").exists());
}

#[test]
fn missing_report_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["report", dir.path().join("nope.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(dir.path(), &["report"]);
    assert_eq!(out.status.code(), Some(2));
}
