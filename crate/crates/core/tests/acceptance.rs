use eichler::suites::{run, run_suite, RunConfig, SuiteReport};
use std::io::Write;

// written to the raw handle so the verdict shows without --nocapture
fn verdict(ok: bool, label: &str) {
    let _ = writeln!(std::io::stderr(), "{} {label}", if ok { "PASS" } else { "FAIL" });
}

fn report(label: &str, s: &SuiteReport, only: impl Fn(&str) -> bool) -> bool {
    let mut ok = true;
    for c in s.checks.iter().filter(|c| only(&c.name)) {
        println!("    {:<70} {:>12.3e} < {:<9.1e} {}", c.name, c.value, c.tolerance, if c.passed { "ok" } else { "FAIL" });
        ok &= c.passed;
    }
    for n in &s.notes {
        println!("    note: {n}");
    }
    verdict(ok, label);
    ok
}

fn criterion(n: u32, suite: &str, label: &str) {
    let s = run_suite(suite, &RunConfig::default()).unwrap();
    assert!(report(&format!("criterion {n}: {label}"), &s, |_| true), "criterion {n} failed");
}

#[test]
fn criterion_1_weil_representation() {
    criterion(1, "weil", "Weil representation relations, homomorphism, unitarity");
}

#[test]
fn criterion_2_theta_laws() {
    criterion(2, "theta", "theta transformation laws");
}

#[test]
fn criterion_3_decomposition() {
    criterion(3, "decompose", "theta decomposition of the test form");
}

#[test]
fn criterion_4_periods() {
    criterion(4, "cocycle", "Eichler integral and period cocycle");
}

fn is_jacobi_law(name: &str) -> bool {
    name.starts_with("Jacobi cocycle law")
}

#[test]
fn criterion_5_representative() {
    let s = run_suite("lift", &RunConfig::default()).unwrap();
    let ok = report("criterion 5 (L-value representative vs quadrature)", &s, |n| !is_jacobi_law(n));
    assert!(ok);
}

#[test]
fn criterion_5_jacobi_cocycle_law() {
    let s = run_suite("lift", &RunConfig::default()).unwrap();
    let ok = report("criterion 5 (Jacobi cocycle law on 20 random pairs)", &s, is_jacobi_law);
    assert!(ok, "lifted period cocycle violates the Jacobi cocycle law");
}

#[test]
fn criterion_6_poincare() {
    criterion(6, "poincare", "Poincare series and cocycle recovery");
}

#[test]
fn criterion_7_obstruction() {
    criterion(7, "obstruction", "exact obstruction phases");
}

#[test]
fn criterion_8_determinism() {
    let cfg = RunConfig { trials: 5, ..RunConfig::default() };
    let suites = ["weil", "theta", "decompose", "cocycle", "obstruction"];
    let a = run(&suites, &cfg, "verify").unwrap().to_json().unwrap();
    let b = run(&suites, &cfg, "verify").unwrap().to_json().unwrap();
    let same = a.as_bytes() == b.as_bytes();
    verdict(same, &format!("criterion 8: byte-identical reports ({} bytes)", a.len()));
    assert!(same);
}
