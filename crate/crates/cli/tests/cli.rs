use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn eichler(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eichler")).args(args).output().expect("spawn eichler")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let o = eichler(&["weilrep", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn unknown_suite_is_rejected() {
    let o = eichler(&["verify", "--suite", "nonsense"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown suite"));
}

#[test]
fn form_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("form.json");
    let o = eichler(&["form", "build-test", "--truncation", "20", "--out", path(&f)]);
    assert!(o.status.success());
    let info = eichler(&["form", "info", "--form", path(&f)]);
    assert!(info.status.success());
    let v: Value = serde_json::from_slice(&info.stdout).unwrap();
    assert_eq!(v["cuspidal"]["cuspidal"], Value::Bool(true));
    assert_eq!(v["cuspidal"]["min_discriminant"], serde_json::json!([7, 6]));
    assert!(v["modular_residuals"]["S"].as_f64().unwrap() < 1e-9);
}

#[test]
fn lvalues_table() {
    let o = eichler(&["lvalues", "--truncation", "40", "--gamma", "1,0,1,1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "mu,n,re,im,method,err");
    // two classes, n = 0..=2
    assert_eq!(lines.len(), 7);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 6 && l.contains("integral")));
}

#[test]
fn lvalues_refuses_non_cuspidal_input() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("nc.json");
    std::fs::write(
        &f,
        r#"{"weight": 4.0, "m": 1, "multiplier_eta_power": 0,
            "series": {"kind": "jacobi", "kappa": [0,1], "lambda": 1, "zeta_den": 1, "index": [1,1],
                       "truncation": [5,1], "coeffs": [[0,0,1.0,0.0],[1,1,3.0,0.0]]}}"#,
    )
    .unwrap();
    let o = eichler(&["lvalues", "--form", path(&f)]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("not cuspidal") && err.contains("check_cuspidal witness"), "{err}");
}

#[test]
fn weilrep_relations_hold_for_small_index() {
    for m in 1..=5 {
        let o = eichler(&["weilrep", "--index", &m.to_string(), "--check-relations"]);
        assert!(o.status.success(), "m = {m}");
        let v: Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(v["dim"].as_u64(), Some(2 * m));
    }
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    let args = |p: &Path| {
        vec!["verify", "--suite", "weil,theta,cocycle,obstruction", "--seed", "3", "--trials", "6", "--out"]
            .into_iter()
            .map(String::from)
            .chain([path(p).to_string()])
            .collect::<Vec<_>>()
    };
    for p in [&a, &b] {
        let v = args(p);
        let o = eichler(&v.iter().map(|s| s.as_str()).collect::<Vec<_>>());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (ra, rb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ra, rb);
    let v: Value = serde_json::from_slice(&ra).unwrap();
    assert_eq!(v["schema"], "eichler-report/1");
    assert_eq!(v["config"]["seed"], 3);
    assert!(v["suites"][0]["checks"][0]["tolerance_source"].as_str().unwrap().contains("profile"));
}

#[test]
fn full_verification_fails_only_on_the_jacobi_lift() {
    let dir = tempfile::tempdir().unwrap();
    let r = dir.path().join("report.json");
    let o = eichler(&["verify", "--suite", "all", "--seed", "7", "--out", path(&r)]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&std::fs::read(&r).unwrap()).unwrap();
    let failing: Vec<String> = v["suites"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|s| {
            let suite = s["suite"].as_str().unwrap().to_string();
            s["checks"].as_array().unwrap().iter().filter(|c| c["passed"] == false).map(move |c| {
                format!("{suite}: {}", c["name"].as_str().unwrap())
            })
        })
        .collect();
    assert_eq!(failing.len(), 1, "{failing:?}");
    assert!(failing[0].starts_with("lift: Jacobi cocycle law"), "{failing:?}");
}

#[test]
fn precision_beyond_f64_warns() {
    let o = eichler(&["--precision", "40", "verify", "--suite", "obstruction"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning: precision 40"));
}
