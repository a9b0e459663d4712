use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iiot-design"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn manifest(rel: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join(rel)
        .to_string_lossy()
        .into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn validate_bundled_is_silent() {
    let out = cli(&[
        "validate",
        &manifest("data/instance.json"),
        "--scenario",
        &manifest("data/scenario.json"),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty() && out.stderr.is_empty());
}

#[test]
fn evaluate_fixture_prints_point_two() {
    let fixture = manifest("tests/fixtures/two_type_sensor.json");
    let out = cli(&[
        "evaluate", &fixture, "--impact", "count", "--attack", "stealthy",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "0.2\n");
}

#[test]
fn reduced_two_singletons_with_k_one_has_positive_risk() {
    let dir = tempfile::tempdir().unwrap();
    for (k, positive) in [("1", true), ("2", false)] {
        let path = dir.path().join(format!("k{k}.json"));
        let path = path.to_str().unwrap();
        let out = cli(&[
            "reduce-setcover",
            "--universe",
            "a,b",
            "--family",
            "a",
            "--family",
            "b",
            "--k",
            k,
            "--out",
            path,
        ]);
        assert_eq!(out.status.code(), Some(0));
        let out = cli(&["optimize", path, "--exhaustive"]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
        assert_eq!(report["risk"].as_f64().unwrap() > 0.0, positive);
    }
}

#[test]
fn malformed_input_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"components": [{"id": "s", "kind": "sensor", "inputs": ["ghost"], "allowed": ["i1"]}], "catalog": []}"#).unwrap();
    let out = cli(&["validate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("ghost") && err.contains("i1"), "{err}");

    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(
        cli(&["validate", bad.to_str().unwrap()]).status.code(),
        Some(1)
    );
    assert_eq!(
        cli(&["validate", "/no/such/file.json"]).status.code(),
        Some(1)
    );
    assert_eq!(cli(&["evaluate", "--no-such-flag"]).status.code(), Some(1));
}

#[test]
fn oversized_exhaustive_search_exits_two() {
    let out = cli(&[
        "optimize",
        &manifest("data/instance.json"),
        "--budget",
        "10",
        "--exhaustive",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("capacity"));
}

#[test]
fn csv_outputs_have_fixed_headers() {
    let instance = manifest("data/instance.json");
    let out = cli(&[
        "sweep",
        &instance,
        "--points",
        "0,10",
        "--iterations",
        "50",
        "--mode",
        "hardening-only",
    ]);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("budget,risk,redundancy,diversity,hardening")
    );
    assert_eq!(lines.count(), 2);

    let out = cli(&[
        "convergence",
        &instance,
        "--budget",
        "30",
        "--iterations",
        "40",
    ]);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("iteration,current,best"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 40);
    assert!(rows.windows(2).all(|w| w[1][2] <= w[0][2]));
}

#[test]
fn optimize_needs_a_budget() {
    let out = cli(&["optimize", &manifest("data/instance.json")]);
    assert_eq!(out.status.code(), Some(1));
}
