use std::path::PathBuf;
use std::process::{Command, Output};

fn qgraph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qgraph")).args(args).output().expect("binary runs")
}

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "data", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn classify_star() {
    let out = stdout(&qgraph(&["classify", "--catalog", "star", "--params", "1,3"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["type"], "I");
    assert_eq!(v["g"], "inf");
    assert_eq!(v["total_length"], 1.0);
    assert!(out.starts_with("{\n  \"type\""));
}

#[test]
fn secular_poly_golden() {
    let out = stdout(&qgraph(&["secular-poly", "--catalog", "circular", "--params", "1,1"]));
    assert_eq!(out, "1 * z1^2 z2^2\n-1 * z1^2\n-8 * z1 z2\n-1 * z2^2\n9\n");
    let out = stdout(&qgraph(&["secular-poly", "--catalog", "Y", "--params", "1,2"]));
    assert_eq!(out, "1 * z1^2 z2^2\n-1 * z1^2\n-1 * z2^2\n-3\n");
}

#[test]
fn resonances_from_document() {
    let out = stdout(&qgraph(&["resonances", &data("interval_g23.json"), "--sigma-max", "10", "--tau-min", "-1"]));
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("sigma,tau,residual,multiplicity,t_norm"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 3);
    for (j, r) in rows.iter().enumerate() {
        assert!((r[0] - (j + 1) as f64 * std::f64::consts::PI).abs() < 1e-10);
        assert!((r[1] + 0.5 * 6f64.ln()).abs() < 1e-10);
        assert_eq!(r[3], 1.0);
    }
    assert!(out.contains("3.14159265358979e0,-8.9587973461402"));
}

#[test]
fn output_is_deterministic() {
    let args = ["resonances", "--catalog", "Y", "--params", "1,1.4142135623730951", "--sigma-max", "60"];
    let a = qgraph(&args);
    let b = qgraph(&args);
    assert_eq!(stdout(&a), stdout(&b));
    let args = ["estimate-h", "--catalog", "interval_Gnn", "--params", "1,2,3", "--samples", "4", "--seed", "11"];
    assert_eq!(stdout(&qgraph(&args)), stdout(&qgraph(&args)));
}

#[test]
fn writes_to_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spectrum.csv");
    let path_s = path.to_string_lossy().into_owned();
    let o = qgraph(&["spectrum", "--catalog", "circular", "--params", "1", "--lengths", "6.283185307179586", "--sigma-max", "2.5", "--out", &path_s]);
    assert!(o.status.success() && o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text, "k,multiplicity\n1.00000000000000e0,2\n2.00000000000000e0,2\n");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"vertices": ["a", "b"], "edges": [{"id": "e", "from": "a", "to": "b", "length": -1}], "leads": []}"#,
    )
    .unwrap();
    let o = qgraph(&["classify", &bad.to_string_lossy()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nonpositive length"));
    assert_eq!(qgraph(&["classify", "--catalog", "star"]).status.code(), Some(1));
    assert_eq!(qgraph(&["weyl", "--catalog", "star", "--params", "1,3", "--sigma-max", "5"]).status.code(), Some(2));
    assert_eq!(qgraph(&["--help"]).status.code(), Some(0));
}

#[test]
fn weyl_and_neps_reports() {
    let out = stdout(&qgraph(&["weyl", "--catalog", "interval_Gnn", "--params", "1,2,3", "--sigma-max", "200"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let slope = v["slope"].as_f64().unwrap();
    assert!((slope * std::f64::consts::PI - 1.0).abs() < 0.02);
    let out = stdout(&qgraph(&["neps", "--catalog", "star", "--params", "1,3", "--sigma-max", "50", "--eps-max", "0.3", "--eps-steps", "3"]));
    assert_eq!(out.lines().count(), 4);
    assert!(out.lines().skip(1).all(|l| l.split(',').nth(1) == Some("0")));
}

#[test]
fn branch_trace_csv() {
    let o = qgraph(&["branch-trace", "--catalog", "Y", "--params", "1,1", "--base", "1.5707963267948966,1.5707963267948966", "--u-max", "0.02", "--u-step", "0.01"]);
    let out = stdout(&o);
    assert_eq!(out.lines().next(), Some("u,b,tau"));
    assert_eq!(out.lines().count(), 6);
    assert_eq!(qgraph(&["branch-trace", "--catalog", "Y", "--params", "1,1", "--base", "1,1"]).status.code(), Some(1));
}

#[test]
fn verify_subset() {
    let out = stdout(&qgraph(&["verify", "--only", "4,13"]));
    assert!(out.contains("[PASS]  4 symbolic polynomials"));
    assert!(out.contains("[PASS] 13 tangent structure"));
    assert!(out.ends_with("2 of 2 criteria passed\n"));
}
