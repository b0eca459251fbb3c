//! End-to-end runs of the `frieze-lab` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_frieze-lab");

const CIRCLE: &str = r#"{"type":"conic","a":1,"b":1}"#;
const PERTURBED: &str = r#"{"type":"fourier","T":6.283185307179586,"f":{"cos":[1,0.05]},"g":{"sin":[1]}}"#;
const QUADRATIC: &str = r#"{"type":"power","abc":[2,1,0],"domain":[0.5,2.0]}"#;

struct Env {
    dir: TempDir,
}

impl Env {
    fn new() -> Self {
        Self { dir: TempDir::new().unwrap() }
    }

    fn file(&self, name: &str, body: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        fs::write(&p, body).unwrap();
        p
    }

    fn out(&self) -> PathBuf {
        self.dir.path().join("out")
    }

    fn run(&self, args: &[&str]) -> Output {
        self.run_env(args, &[])
    }

    fn run_env(&self, args: &[&str], env: &[(&str, &str)]) -> Output {
        let mut cmd = Command::new(BIN);
        cmd.args(args).arg("--out").arg(self.out());
        for (k, v) in env {
            cmd.env(k, v);
        }
        cmd.output().unwrap()
    }

    fn report(&self, name: &str) -> Value {
        serde_json::from_str(&fs::read_to_string(self.out().join(name)).unwrap()).unwrap()
    }
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn check_circle_passes_and_is_self_dual() {
    let env = Env::new();
    let curve = env.file("circle.json", CIRCLE);
    let o = env.run(&["check", "--curve", p(&curve), "--grid", "16"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = env.report("check_report.json");
    assert_eq!(r["pass"], true);
    assert_eq!(r["self_dual"], true);
    assert_eq!(r["conic_test"]["is_conic"], true);
    assert!(r["report"]["frieze_relation_fg"].as_f64().unwrap() <= 1e-9);
    // stdout carries the same report
    let printed: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(printed, r);
}

#[test]
fn perturbed_conic_passes_but_is_not_self_dual() {
    let env = Env::new();
    let curve = env.file("perturbed.json", PERTURBED);
    let o = env.run(&["check", "--curve", p(&curve), "--grid", "16"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = env.report("check_report.json");
    assert_eq!(r["self_dual"], false);
    assert_eq!(r["conic_test"]["is_conic"], false);
    assert_eq!(r["self_duality_consistent"], true);
}

#[test]
fn open_power_curve_fails_the_closed_check() {
    let env = Env::new();
    let curve = env.file("quad.json", QUADRATIC);
    let o = env.run(&["check", "--curve", p(&curve), "--grid", "16"]);
    assert_eq!(code(&o), 1);
    let r = env.report("check_report.json");
    assert_eq!(r["report"]["closed"], false);
    assert!(r["failures"].as_array().unwrap().iter().any(|f| f == "periodicity"));
}

#[test]
fn build_writes_the_grid() {
    let env = Env::new();
    let curve = env.file("circle.json", CIRCLE);
    let o = env.run(&["build", "--curve", p(&curve), "--grid", "8"]);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(env.out().join("frieze_grid.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,y,F,G"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 64);
    for r in rows {
        assert!((r[2] - (1.0 - (r[0] - r[1]).cos())).abs() < 1e-12);
        assert!((r[2] - r[3]).abs() < 1e-12);
    }
}

#[test]
fn reduce_quadratic_gives_difference() {
    let env = Env::new();
    let curve = env.file("quad.json", QUADRATIC);
    let o = env.run(&["reduce", "--curve", p(&curve), "--grid", "12"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = env.report("reduce_report.json");
    assert!(r["report"]["pde_residual"].as_f64().unwrap() <= 1e-10);
    let csv = fs::read_to_string(env.out().join("h_grid.csv")).unwrap();
    assert!(csv.starts_with("x,y,H\n"));
    for l in csv.lines().skip(1) {
        let v: Vec<f64> = l.split(',').map(|s| s.parse().unwrap()).collect();
        assert!((v[2] - (v[1] - v[0])).abs() <= 1e-10);
    }
}

#[test]
fn discrete_reports_second_order() {
    let env = Env::new();
    let curve = env.file("circle.json", CIRCLE);
    let o = env.run(&["discrete", "--curve", p(&curve)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = env.report("discrete_report.json");
    let order = r["convergence"]["order_g_from_f"].as_f64().unwrap();
    assert!((order - 2.0).abs() < 0.25);
    let csv = fs::read_to_string(env.out().join("lattice.csv")).unwrap();
    assert!(csv.starts_with("i,j,kind,value\n"));
}

#[test]
fn discrete_rejects_non_halving_spacings() {
    let env = Env::new();
    let curve = env.file("circle.json", CIRCLE);
    let o = env.run(&["discrete", "--curve", p(&curve), "--eps", "0.2,0.15"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn symplectic_limit_csv() {
    let env = Env::new();
    let curve = env.file("circle.json", CIRCLE);
    let u = env.file("u.json", r#"{"f":{"cos":[0,1]}}"#);
    let v = env.file("v.json", r#"{"f":{"sin":[0,1]}}"#);
    let args = ["symplectic", "--curve", p(&curve), "--u", p(&u), "--v", p(&v)];
    // the ratio settles at -1, so the default -2 target is reported as failed
    let o = env.run(&args);
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(env.out().join("limit.csv")).unwrap();
    assert!(csv.starts_with("epsilon,cluster_value,omega_value,ratio\n"));
    assert_eq!(csv.lines().count(), 4);
    let r = env.report("symplectic_report.json");
    let w = r["limit"]["omega_full"].as_f64().unwrap();
    assert!((w - 8.0 * std::f64::consts::PI).abs() < 1e-9);

    let mut with_factor = args.to_vec();
    with_factor.extend(["--factor", "-1"]);
    assert_eq!(code(&env.run(&with_factor)), 0);
}

#[test]
fn input_errors_exit_two() {
    let env = Env::new();
    let circle = env.file("circle.json", CIRCLE);
    let broken = env.file("broken.json", r#"{"type":"conic","a":1"#);
    let bad_sum = env.file("sum.json", r#"{"type":"power","abc":[2,1,1],"domain":[0.5,2]}"#);
    let unknown = env.file("unknown.json", r#"{"type":"spiral"}"#);

    assert_eq!(code(&env.run(&["check", "--curve", p(&broken)])), 2);
    assert_eq!(code(&env.run(&["check", "--curve", p(&unknown)])), 2);
    let o = env.run(&["check", "--curve", p(&bad_sum)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("a+b+c = 3"));
    assert_eq!(code(&env.run(&["check", "--curve", p(&circle), "--grid", "4"])), 2);
    assert_eq!(code(&env.run(&["check", "--curve", p(&circle), "--tol", "frieze=0"])), 2);
    assert_eq!(code(&env.run(&["check", "--curve", "/nonexistent/curve.json"])), 2);
    assert_eq!(code(&env.run(&["bogus"])), 2);
    let o = env.run_env(&["check", "--curve", p(&circle)], &[("FRIEZE_LAB_THREADS", "zero")]);
    assert_eq!(code(&o), 2);
}

#[test]
fn tolerance_overrides_change_the_verdict() {
    let env = Env::new();
    let curve = env.file("perturbed.json", PERTURBED);
    let o = env.run(&["check", "--curve", p(&curve), "--grid", "8", "--tol", "self_dual=1"]);
    assert_eq!(code(&o), 0);
    assert_eq!(env.report("check_report.json")["self_dual"], true);
}

#[test]
fn thread_cap_is_accepted() {
    let env = Env::new();
    let curve = env.file("circle.json", CIRCLE);
    let o = env.run_env(&["check", "--curve", p(&curve), "--grid", "8"], &[("FRIEZE_LAB_THREADS", "1")]);
    assert_eq!(code(&o), 0);
}

#[test]
fn numerical_failure_exits_three() {
    let env = Env::new();
    let mut cos = vec![0.0; 20];
    cos[0] = 1.0;
    cos[19] = 0.002;
    let doc = serde_json::json!({"type": "fourier", "T": std::f64::consts::TAU, "f": {"cos": cos}, "g": {"sin": [1]}});
    let curve = env.file("ripple.json", &doc.to_string());
    // a 20th harmonic is far too fast for 64 Hill steps
    let o = env.run(&["reduce", "--curve", p(&curve), "--grid", "8", "--steps", "64"]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("drift"));
}
