use std::path::Path;
use std::process::{Command, Output};

use mdest::report::{RunDetail, MAJORANT_COLUMNS};

fn mdest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mdest")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

#[test]
fn series_resistance_rows_are_exact() {
    let o = mdest(&["run", "--scenario", "series_resistance", "--h", "0.25,0.125"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let t = rows(&stdout(&o));
    assert_eq!(t[0], MAJORANT_COLUMNS.map(String::from).to_vec());
    assert_eq!(t.len(), 3);
    let m = col(&t[0], "majorant");
    for r in &t[1..] {
        assert!(r[m].parse::<f64>().unwrap() <= 1e-8);
    }
}

#[test]
fn projection_self_test_passes() {
    let o = mdest(&["run", "--check-projections"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.starts_with("[PASS]")).count(), 4, "{out}");
    assert!(!out.contains("[FAIL]"));
}

#[test]
fn configuration_errors_exit_with_two() {
    for args in [
        vec!["run"],
        vec!["run", "--scenario", "no_such_scenario"],
        vec!["run", "--scenario", "series_resistance", "--h", "0.125,0.25"],
        vec!["run", "--scenario", "series_resistance", "--h", "-0.1"],
        vec!["run", "--domain-spec", "/nonexistent/domain.json"],
        vec!["run", "--scenario", "series_resistance", "--mesh-out"],
    ] {
        let o = mdest(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&o.stderr).to_lowercase().contains("usage"), "{args:?}");
    }
}

#[test]
fn pure_neumann_domain_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("neumann_only.json");
    let text = r#"{
      "subdomains": [{"id": 0, "dim": 2, "geometry": {"polygon": [[0,0],[1,0],[1,1],[0,1]]}}],
      "boundary_conditions": [{"subdomain": 0, "kind": "neumann", "segment": [[0,0],[1,0]], "value": 0.0}]
    }"#;
    std::fs::write(&spec, text).unwrap();
    let o = mdest(&["run", "--domain-spec", spec.to_str().unwrap(), "--h", "0.5"]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn output_is_deterministic() {
    let args = ["run", "--scenario", "smooth_source", "--h", "0.25,0.125", "--perturb"];
    let a = mdest(&args);
    let b = mdest(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

fn close(a: &str, b: &str) -> bool {
    match (a.parse::<f64>(), b.parse::<f64>()) {
        (Ok(x), Ok(y)) => (x - y).abs() <= 1e-9 * x.abs().max(y.abs()) + 1e-12,
        _ => a == b,
    }
}

fn check_fixture(name: &str) {
    let o = mdest(&["run", "--scenario", name, "--perturb"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let got = rows(&stdout(&o));
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(format!("{name}.csv"));
    let want = rows(&std::fs::read_to_string(path).unwrap());
    assert_eq!(got.len(), want.len());
    assert_eq!(got[0], want[0]);
    for (g, w) in got.iter().zip(&want).skip(1) {
        assert_eq!(g.len(), w.len());
        for (k, (a, b)) in g.iter().zip(w).enumerate() {
            assert!(close(a, b), "{name} column {}: {a} vs {b}", want[0][k]);
        }
    }
}

#[test]
fn series_resistance_matches_fixture() {
    check_fixture("series_resistance");
}

#[test]
fn smooth_source_matches_fixture() {
    check_fixture("smooth_source");
}

#[test]
fn network_matches_fixture() {
    check_fixture("network_2d");
}

#[test]
fn report_files_agree() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = mdest(&["run", "--scenario", "smooth_source", "--h", "0.25", "--perturb", "--out", out, "--mesh-out", "--dump-transfer"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("smooth_source_majorant.csv")).unwrap();
    assert_eq!(csv, stdout(&o));
    let table = rows(&csv);
    let m = col(&table[0], "majorant");
    let detail: Vec<RunDetail> = serde_json::from_str(&std::fs::read_to_string(dir.path().join("smooth_source_detail.json")).unwrap()).unwrap();
    assert_eq!(detail.len(), table.len() - 1);
    for (d, r) in detail.iter().zip(&table[1..]) {
        let reported: f64 = r[m].parse().unwrap();
        assert!((d.recomputed_majorant() - reported).abs() <= 1e-12 * reported);
        assert_eq!(d.config, r[col(&table[0], "config")]);
    }
    let ind = rows(&std::fs::read_to_string(dir.path().join("smooth_source_indicators.csv")).unwrap());
    assert_eq!(ind.len(), table.len());
    let names: Vec<String> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    assert_eq!(names.iter().filter(|n| n.ends_with("_mesh.json")).count(), 3);
    assert_eq!(names.iter().filter(|n| n.ends_with("_transfer.json")).count(), 3);
    let dump: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("smooth_source_h0.25_perturbed+_transfer.json")).unwrap()).unwrap();
    assert_eq!(dump.as_array().unwrap().len(), 2);
    assert!(!dump[0]["lo"]["src_parent"].as_array().unwrap().is_empty());
}

#[test]
fn json_format_prints_detail() {
    let o = mdest(&["run", "--scenario", "series_resistance", "--h", "0.5", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let detail: Vec<RunDetail> = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(detail.len(), 1);
    assert!(detail[0].majorant <= 1e-8 && detail[0].error_primal.is_some());
}

#[test]
fn compare_reports_deviations() {
    let dir = tempfile::tempdir().unwrap();
    let o = mdest(&["compare", "--scenario", "series_resistance", "--h", "0.25", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let t = rows(&stdout(&o));
    assert_eq!(t[0], ["scenario", "h", "quantity", "baseline", "perturbed_mean", "perturbed_std", "relative"]);
    let rel = col(&t[0], "relative");
    assert!(t.len() > 2);
    for r in &t[1..] {
        assert!(r[rel].parse::<f64>().unwrap() <= 1e-8, "{r:?}");
    }
    assert!(dir.path().join("series_resistance_deviation.csv").exists());
}

#[test]
fn compare_without_fractures_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("square.json");
    let text = r#"{
      "subdomains": [{"id": 0, "dim": 2, "geometry": {"polygon": [[0,0],[1,0],[1,1],[0,1]]}}],
      "boundary_conditions": [
        {"subdomain": 0, "kind": "dirichlet", "segment": [[0,0],[0,1]], "value": 1.0},
        {"subdomain": 0, "kind": "dirichlet", "segment": [[1,0],[1,1]], "value": 0.0}
      ]
    }"#;
    std::fs::write(&spec, text).unwrap();
    let path = spec.to_str().unwrap();
    let run = mdest(&["run", "--domain-spec", path, "--h", "0.25"]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let t = rows(&stdout(&run));
    assert_eq!(t[1][0], "square");
    assert!(t[1][col(&t[0], "majorant")].parse::<f64>().unwrap() <= 1e-8);
    assert_eq!(mdest(&["compare", "--domain-spec", path, "--h", "0.25"]).status.code(), Some(2));
}
