use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_isodense"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

fn run_env(dir: &Path, args: &[&str], threads: &str) -> Output {
    bin().current_dir(dir).env("ISODENSE_THREADS", threads).args(args).output().expect("binary runs")
}

fn rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

fn write(dir: &Path, name: &str, body: &str) {
    fs::write(dir.join(name), body).unwrap();
}

#[test]
fn check_certifies_power_tail_by_exponential_gap() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "pt.json", r#"{"model": "power_tail", "params": {"alpha": 1}, "dim": 2}"#);
    let o = run(dir.path(), &["check", "--density", "pt.json", "--volume", "1", "--out", "c.csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (h, r) = rows(&fs::read_to_string(dir.path().join("c.csv")).unwrap());
    let gap = r.iter().find(|x| x[col(&h, "condition")] == "exponential_gap").unwrap();
    assert_eq!(gap[col(&h, "verdict")], "pass");
    let side: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("c.csv.json")).unwrap()).unwrap();
    assert_eq!(side["summary"]["certified"], true);
    assert_eq!(side["command"], "check");
    assert!(side["versions"]["isodense"].is_string());
    assert!(side["tolerances"]["gap_rates"].is_array());
}

#[test]
fn check_exit_codes_for_undecided_densities() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["check", "--density", "gaussian_like"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn euclidean_profile_sweep() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "one.json", r#"{"model": "constant", "params": {"a": 1}}"#);
    let o = run(dir.path(), &["profile", "--density", "one.json", "--volumes", "0.5:5:10"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (h, r) = rows(&String::from_utf8(o.stdout).unwrap());
    assert_eq!(r.len(), 10);
    for c in ["V", "I_estimate", "H", "min_H0", "closure_residual", "upper_bound"] {
        col(&h, c);
    }
    for row in &r {
        let v: f64 = row[col(&h, "V")].parse().unwrap();
        let i: f64 = row[col(&h, "I_estimate")].parse().unwrap();
        assert!((i / (2.0 * (PI * v).sqrt()) - 1.0).abs() < 1e-3);
    }
    let first: f64 = r[0][0].parse().unwrap();
    let second: f64 = r[1][0].parse().unwrap();
    assert!((second / first - 10f64.powf(1.0 / 9.0)).abs() < 1e-12, "geometric spacing by default");
}

#[test]
fn nonexistence_construction() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["construct", "nonexistence", "--eps", "1e-1,1e-2,1e-3", "--out", "n.csv"]);
    assert_eq!(o.status.code(), Some(0));
    let (h, r) = rows(&fs::read_to_string(dir.path().join("n.csv")).unwrap());
    let vols: Vec<f64> = r.iter().map(|x| x[col(&h, "volume")].parse().unwrap()).collect();
    let pers: Vec<f64> = r.iter().map(|x| x[col(&h, "perimeter")].parse().unwrap()).collect();
    assert!(vols.iter().all(|v| (v - 1.0).abs() < 1e-6));
    assert!(pers.windows(2).all(|w| w[1] < w[0]));
    assert_eq!(r.iter().map(|x| x[col(&h, "j")].clone()).collect::<Vec<_>>(), ["1", "2", "3"]);
}

#[test]
fn construct_spacing_error_is_a_validation_failure() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["construct", "nonexistence", "--eps", "0.2,0.19"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("spacing"));
}

#[test]
fn malformed_inputs_exit_two_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "ball.json", r#"{"kind": "ball", "center": [0, 0]}"#);
    write(dir.path(), "bad_density.json", r#"{"model": "no_such_model"}"#);
    write(dir.path(), "good_ball.json", r#"{"kind": "ball", "center": [0, 0], "radius": 1}"#);
    let o = run(dir.path(), &["measure", "--density", "constant", "--region", "ball.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("radius"));
    let o = run(dir.path(), &["measure", "--density", "bad_density.json", "--region", "good_ball.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("model"));
    let o = run(dir.path(), &["profile", "--density", "constant", "--volumes", "1:2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(dir.path(), &["measure", "--density", "constant"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run_env(dir.path(), &["measure", "--density", "constant", "--region", "good_ball.json"], "zero");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn measure_and_mean_density() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "ball.json", r#"{"kind": "ball", "center": [3, 0], "radius": 0.5}"#);
    let o = run(dir.path(), &["measure", "--density", "constant", "--region", "ball.json"]);
    let (h, r) = rows(&String::from_utf8(o.stdout).unwrap());
    let v: f64 = r[0][col(&h, "volume")].parse().unwrap();
    assert!((v - PI / 4.0).abs() < 1e-12);
    let o = run(dir.path(), &["mean-density", "--density", "linear", "--region", "ball.json"]);
    assert_eq!(o.status.code(), Some(0));
    let (h, r) = rows(&String::from_utf8(o.stdout).unwrap());
    let get = |c: &str| -> f64 { r[0][col(&h, c)].parse().unwrap() };
    assert!(get("lower_bound") <= get("mean_density") && get("mean_density") <= get("upper_bound"));
}

#[test]
fn symmetrize_round_trips_a_mask() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "two.json", r#"{"kind": "ball", "center": [0.6, 0.3], "radius": 0.5}"#);
    let o = run(dir.path(), &["symmetrize", "--density", "power_tail", "--region", "two.json", "--h", "0.03125", "--mask-out", "s.mask"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (h, r) = rows(&String::from_utf8(o.stdout).unwrap());
    let after: f64 = r[0][col(&h, "volume_after")].parse().unwrap();
    let o = run(dir.path(), &["measure", "--density", "power_tail", "--region", "s.mask"]);
    assert_eq!(o.status.code(), Some(0));
    let (h2, r2) = rows(&String::from_utf8(o.stdout).unwrap());
    let v: f64 = r2[0][col(&h2, "volume")].parse().unwrap();
    assert!((v - after).abs() < 1e-12 * after.max(1.0));
}

#[test]
fn geodesic_rows_accumulate() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["geodesic", "--density", "exp_growth", "--from", "1,0", "--to", "-0.2,1", "--h", "0.05", "--out", "g.csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (h, r) = rows(&fs::read_to_string(dir.path().join("g.csv")).unwrap());
    assert_eq!(h, ["x", "y", "cumulative"]);
    let c: Vec<f64> = r.iter().map(|x| x[2].parse().unwrap()).collect();
    assert_eq!(c[0], 0.0);
    assert!(c.windows(2).all(|w| w[1] > w[0]));
    let side: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("g.csv.json")).unwrap()).unwrap();
    assert_eq!(side["summary"]["triangle_containment"]["holds"], true);
    assert!((side["summary"]["weighted_length"].as_f64().unwrap() - c[c.len() - 1]).abs() < 1e-12);
}

#[test]
fn variation_validation_on_the_unit_circle() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "disk.json", r#"{"kind": "ball", "center": [0, 0], "radius": 1}"#);
    let o = run(dir.path(), &["validate-variation", "--density", "gaussian_like", "--region", "disk.json", "--out", "v.csv"]);
    assert_eq!(o.status.code(), Some(0));
    let side: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("v.csv.json")).unwrap()).unwrap();
    assert!((side["summary"]["dv_predicted"].as_f64().unwrap() - 2.0 * PI * std::f64::consts::E).abs() < 1e-9);
}

#[test]
fn brick_scaling_is_reported_as_not_certified() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["construct", "scaling", "--eps", "0.1,0.05,0.02"]);
    assert_eq!(o.status.code(), Some(3));
    let (_, r) = rows(&String::from_utf8(o.stdout).unwrap());
    assert_eq!(r.len(), 3);
}

#[test]
fn other_constructions_emit_tables() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["construct", "brick", "--eps", "0.1", "--density-out", "b.json"][..],
        &["construct", "decaying-balls"],
        &["construct", "bumpy", "--i-max", "4", "--density-out", "bumpy.json"],
        &["construct", "steepest", "--i-max", "3"],
    ] {
        let o = run(dir.path(), args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!rows(&String::from_utf8(o.stdout).unwrap()).1.is_empty());
    }
    // Constructed densities load back through --density.
    write(dir.path(), "ball.json", r#"{"kind": "ball", "center": [64, 0], "radius": 0.5}"#);
    let o = run(dir.path(), &["measure", "--density", "bumpy.json", "--region", "ball.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(dir.path(), &["construct", "bumpy", "--i-max", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["check", "--density", "power_tail", "--dim", "3", "--seed", "5", "--out", "r.csv"];
    let o = run(dir.path(), &args);
    assert_eq!(o.status.code(), Some(0));
    let a = (fs::read(dir.path().join("r.csv")).unwrap(), fs::read(dir.path().join("r.csv.json")).unwrap());
    let o = run_env(dir.path(), &args, "1");
    assert_eq!(o.status.code(), Some(0));
    let b = (fs::read(dir.path().join("r.csv")).unwrap(), fs::read(dir.path().join("r.csv.json")).unwrap());
    assert_eq!(a, b);

    let p = ["profile", "--density", "gaussian_like", "--volumes", "0.5:4:4", "--out", "p.csv"];
    run(dir.path(), &p);
    let first = fs::read(dir.path().join("p.csv")).unwrap();
    run_env(dir.path(), &p, "1");
    assert_eq!(first, fs::read(dir.path().join("p.csv")).unwrap());
}
