use std::process::Command;

fn wgms(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_wgms")).args(args).output().unwrap()
}

#[test]
fn config_errors_exit_with_two() {
    assert_eq!(wgms(&["--trials", "0", "validate"]).status.code(), Some(2));
    assert_eq!(wgms(&["--config", "/nonexistent/config.json", "validate"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"sweep": {"trials": "many"}}"#).unwrap();
    assert_eq!(wgms(&["--config", bad.to_str().unwrap(), "validate"]).status.code(), Some(2));
    assert_eq!(wgms(&["design", "--placement", "hexagonal"]).status.code(), Some(2));
}

#[test]
fn unobservable_design_exits_with_three() {
    // a single receive antenna cannot resolve position
    let out = wgms(&["--set", "scenario.receiver.rows=1", "--set", "scenario.receiver.cols=1", "design", "--elements", "16"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn design_report_round_trips_through_peb() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("design.json");
    let out = wgms(&["design", "--placement", "random", "--elements", "16", "--trial", "2", "--out", report.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["passive"], true);
    let achieved = json["peb_achieved_m"].as_f64().unwrap();
    let out = wgms(&["peb", "--design", report.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let peb: f64 = text.lines().next().unwrap().strip_prefix("peb_m ").unwrap().parse().unwrap();
    assert_eq!(peb, achieved);
    assert!(text.contains("passive true"));
}

#[test]
fn design_matches_the_sweep_row() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let set = ["--set", "sweep.elements=[16]", "--set", r#"sweep.placements=[{"kind":"random"}]"#, "--trials", "2"];
    let mut args = set.to_vec();
    args.extend(["sweep", "--out", csv.to_str().unwrap(), "--svg"]);
    assert!(wgms(&args).status.success());
    assert!(dir.path().join("s.summary.csv").exists());
    assert!(std::fs::read_to_string(dir.path().join("s.svg")).unwrap().starts_with("<svg"));
    let rows = wgms_harness::output::read_csv(&csv).unwrap();
    assert_eq!(rows.len(), 2);
    let mut args = set.to_vec();
    args.extend(["design", "--trial", "1"]);
    let out = wgms(&args);
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["peb_achieved_m"].as_f64(), rows[1].achieved.value());
    assert_eq!(json["seed"].as_u64(), Some(rows[1].seed));
}

#[test]
fn greens_writes_both_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = wgms(&["greens", "--elements", "8", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let g = std::fs::read_to_string(dir.path().join("coupling.csv")).unwrap();
    assert!(g.lines().count() >= 8);
    assert!(dir.path().join("excitation.csv").exists());
}

#[test]
fn validate_passes() {
    let out = wgms(&["validate", "--elements", "32"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 8);
}
