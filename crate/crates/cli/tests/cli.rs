use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hetcycle"))
}

fn run(args: &[&str], dir: &Path) -> (i32, String, String) {
    let out = bin().args(args).current_dir(dir).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn write_example_config(n: u8, dir: &Path) -> String {
    let p = hetcycle::presets::example::<f64>(n).unwrap();
    let path = dir.join(format!("ex{n}.cfg"));
    std::fs::write(&path, hetcycle::write_config(&p)).unwrap();
    path.display().to_string()
}

fn csv_rows(path: &Path) -> Vec<hetcycle::export::TrajectoryRow> {
    hetcycle::export::read_trajectory_csv(std::fs::File::open(path).unwrap()).unwrap()
}

#[test]
fn example1_certifies_one_cycle_with_four_segments() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = run(&["example", "1", "--csv-dir", "csv", "--no-timing"], dir.path());
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["verdict"]["cycle_count"], 1);
    assert_eq!(v["verdict"]["theorem"], "t1");
    let rows = csv_rows(&dir.path().join("csv/example1_orbits.csv"));
    let mut roles: Vec<&str> = rows.iter().map(|r| r.role.as_str()).collect();
    roles.dedup();
    assert_eq!(roles, ["gamma1_back", "gamma1_fwd", "gamma_up_back", "gamma_up_fwd"]);
}

#[test]
fn example2_uses_saddle_focus_subcase_b() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = run(&["example", "2", "--csv-dir", ".", "--no-timing"], dir.path());
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["verdict"]["theorem"], "t2");
    assert_eq!(v["verdict"]["subcase"], "b");
    assert_eq!(v["verdict"]["cycle_count"], 1);
}

#[test]
fn example3_split_emits_six_segments() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = run(&["example", "3", "--csv-dir", "csv", "--split", "--no-timing"], dir.path());
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["verdict"]["cycle_count"], 2);
    let files = v["csv_files"].as_array().unwrap();
    assert_eq!(files.len(), 6);
    for f in files {
        let rows = csv_rows(&dir.path().join(f.as_str().unwrap()));
        assert!(rows.len() > 10);
        assert!(rows.windows(2).all(|w| w[0].t < w[1].t));
    }
}

#[test]
fn check_config_file_and_override_flips_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_example_config(3, dir.path());
    let (code, out, _) = run(&["check", &cfg, "--no-timing"], dir.path());
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(v.get("certificates").is_none());

    let (code, out, _) = run(&["check", &cfg, "--set", "q2=10", "--no-timing"], dir.path());
    assert_eq!(code, 2);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["verdict"]["cycle_count"], 0);
    let failed: Vec<&str> = v["verdict"]["evidence"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|e| e["pass"] == false)
        .map(|e| e["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["p+_in_window", "p-_in_window"]);
}

#[test]
fn zero_lambda_is_a_config_error_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_example_config(1, dir.path());
    let text = std::fs::read_to_string(&cfg).unwrap();
    let text: String = text
        .lines()
        .map(|l| if l.starts_with("lambda") { "lambda = 0".to_string() } else { l.to_string() })
        .collect::<Vec<_>>()
        .join("\n");
    std::fs::write(&cfg, text).unwrap();
    let (code, out, err) = run(&["check", &cfg], dir.path());
    assert_eq!(code, 1);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["error"]["class"], "config");
    assert_eq!(v["error"]["key"], "lambda");
    assert!(err.contains("lambda"));
}

#[test]
fn missing_config_file_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = run(&["check", "nope.cfg"], dir.path());
    assert_eq!(code, 1);
    assert!(err.contains("nope.cfg"));
}

#[test]
fn report_round_trips_losslessly() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = run(&["example", "2", "--out", "r.json", "--csv-dir", "."], dir.path());
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(dir.path().join("r.json")).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(hetcycle_cli::json::to_string(&v), text);
    let d = v["params"]["d"].as_f64().unwrap();
    assert_eq!(d, (35.0f64 / 11.0).sqrt());
}

#[test]
fn reports_are_deterministic_without_timing() {
    let dir = tempfile::tempdir().unwrap();
    let a = run(&["example", "3", "--csv-dir", ".", "--no-timing"], dir.path()).1;
    let b = run(&["example", "3", "--csv-dir", ".", "--no-timing"], dir.path()).1;
    assert_eq!(a, b);
}

#[test]
fn horizon_flags_reach_certificates() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = run(&["example", "1", "--tback", "2", "--tfwd", "3", "--csv-dir", "."], dir.path());
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    let h = &v["certificates"][0]["horizons"];
    assert_eq!(h["gamma1_back"], 2.0);
    assert_eq!(h["gamma_up_fwd"], 3.0);
    assert!(v["timing_ms"]["verify"].is_number());
}

#[test]
fn simulate_converges_to_the_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_example_config(1, dir.path());
    let (code, out, _) = run(
        &["simulate", &cfg, "--x0", "0.5,0,0", "--t1", "10", "--oracle", "20", "--seed", "3", "--csv-dir", "sim"],
        dir.path(),
    );
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(v["cycle_residual"].as_f64().unwrap() <= 1e-4);
    assert!(v["oracle"]["max_error"].as_f64().unwrap() <= 1e-6);
    assert_eq!(v["events"], 0);
    let rows = csv_rows(&dir.path().join("sim/trajectory.csv"));
    assert!(rows.iter().all(|r| r.role == "simulation"));
    let ev = hetcycle::export::read_events_csv(std::fs::File::open(dir.path().join("sim/events.csv")).unwrap()).unwrap();
    assert!(ev.is_empty());
}

#[test]
fn simulate_from_q_is_constant() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_example_config(3, dir.path());
    let (code, out, _) = run(&["simulate", &cfg, "--x0", "2,0,2", "--t1", "4", "--csv-dir", "."], dir.path());
    assert_eq!(code, 0);
    let rows = csv_rows(&dir.path().join("trajectory.csv"));
    assert!(rows.iter().all(|r| r.x == [2.0, 0.0, 2.0]));
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["final"]["side"], "right");
}

#[test]
fn simulate_records_switching_events() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_example_config(1, dir.path());
    let (code, _, _) = run(&["simulate", &cfg, "--x0", "1.21,0,0.01", "--t1", "5", "--csv-dir", "."], dir.path());
    assert_eq!(code, 0);
    let ev = hetcycle::export::read_events_csv(std::fs::File::open(dir.path().join("events.csv")).unwrap()).unwrap();
    assert!(!ev.is_empty());
    for e in ev {
        assert!((e.x[0] + e.x[2] - 1.2).abs() <= 1e-10);
    }
}

#[test]
fn bad_example_number_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = run(&["example", "4"], dir.path());
    assert_ne!(code, 0);
}
