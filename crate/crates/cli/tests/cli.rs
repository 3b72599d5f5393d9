use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const CONSTANT_4: &str = r#"{"n": 4, "curvature": {"family": "constant", "K0": 8}}"#;

struct Run {
    dir: tempfile::TempDir,
}

impl Run {
    fn new(config: &str) -> Self {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("config.json"), config).unwrap();
        Self { dir }
    }

    fn out(&self) -> PathBuf {
        self.dir.path().join("out")
    }

    fn exec(&self, cmd: &str, extra: &[&str]) -> Output {
        self.exec_env(cmd, extra, None)
    }

    fn exec_env(&self, cmd: &str, extra: &[&str], seed: Option<&str>) -> Output {
        let mut c = Command::new(env!("CARGO_BIN_EXE_rpn-shoot"));
        c.arg(cmd)
            .arg("--config")
            .arg(self.dir.path().join("config.json"))
            .arg("--out")
            .arg(self.out())
            .args(extra)
            .env_remove("RPN_SHOOT_SEED");
        if let Some(seed) = seed {
            c.env("RPN_SHOOT_SEED", seed);
        }
        c.output().unwrap()
    }

    fn read(&self, name: &str) -> String {
        fs::read_to_string(self.out().join(name)).unwrap()
    }

    fn json(&self, name: &str) -> Value {
        serde_json::from_str(&self.read(name)).unwrap()
    }
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn check<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .unwrap_or_else(|| panic!("no check {name}"))
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn solve_finds_the_unit_root() {
    let run = Run::new(CONSTANT_4);
    let out = run.exec("solve", &[]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let root = run.json("root.json");
    assert!((root["lambda1"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!(root["G_at_root"].as_f64().unwrap().abs() < 1e-8);
    let cert = &root["certificate"];
    assert!(cert["residual_max"].as_f64().unwrap() < 1e-6);
    assert_eq!(cert["positive"], true);
    assert_eq!(cert["certified"], true);

    let rows = csv_rows(&run.out().join("solution.csv"));
    assert_eq!(rows[0], ["r", "v", "dv"]);
    assert_eq!(rows.len(), 1 + 401);
    assert_eq!(rows[1][0], "0");
    let v0: f64 = rows[1][1].parse().unwrap();
    assert!((v0 - 1.0).abs() < 1e-6);
    assert_eq!(rows.last().unwrap()[0], "1000");
    assert!(run.out().join("scan.csv").exists());
}

#[test]
fn solve_without_sign_change_exits_two() {
    let run = Run::new(CONSTANT_4);
    let out = run.exec("solve", &["--lambda-min", "2", "--lambda-max", "3"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("widen"));
    let rows = csv_rows(&run.out().join("scan.csv"));
    assert!(rows[1..].iter().all(|r| r[1].parse::<f64>().unwrap() < 0.0));
    assert!(!run.out().join("root.json").exists());
}

#[test]
fn malformed_config_exits_one() {
    for text in ["{\"n\": 4,", r#"{"n": 4, "curvature": {"family": "constant", "K0": 8}, "bogus": true}"#] {
        let run = Run::new(text);
        for cmd in ["solve", "scan", "verify"] {
            let out = run.exec(cmd, &[]);
            assert_eq!(code(&out), 1);
            assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
        }
    }
}

#[test]
fn solve_rejects_unsymmetrized_profile() {
    let run = Run::new(r#"{"n": 4, "curvature": {"family": "constant", "K0": 8, "symmetrized": false}}"#);
    assert_eq!(code(&run.exec("solve", &[])), 1);
}

#[test]
fn scan_default_grid() {
    let run = Run::new(CONSTANT_4);
    assert_eq!(code(&run.exec("scan", &[])), 0);
    let rows = csv_rows(&run.out().join("scan.csv"));
    assert_eq!(rows[0], ["lambda", "G", "status"]);
    assert_eq!(rows.len(), 42);
    let data: Vec<(f64, f64)> = rows[1..]
        .iter()
        .map(|r| {
            assert_eq!(r[2], "ok");
            (r[0].parse().unwrap(), r[1].parse().unwrap())
        })
        .collect();
    let changes: Vec<_> = data.windows(2).filter(|w| w[0].1 > 0.0 && w[1].1 <= 0.0).collect();
    assert_eq!(changes.len(), 1);
    assert!(changes[0][0].0 < 1.0 && changes[0][1].0 >= 1.0);
}

#[test]
fn scan_keeps_failed_samples() {
    let run = Run::new(
        r#"{"n": 4, "curvature": {"family": "table", "knots": [0, 0.8, 0.9, 1], "values": [1, 1, 20000, 20000]},
            "scan": {"lambda_min": 0.01, "lambda_max": 1, "points": 5}}"#,
    );
    assert_eq!(code(&run.exec("scan", &[])), 0);
    let rows = csv_rows(&run.out().join("scan.csv"));
    assert_eq!(rows.len(), 6);
    let last = rows.last().unwrap();
    assert_eq!(last[1], "");
    assert_eq!(last[2], "hit_zero");
    assert_eq!(rows[1][2], "ok");
}

#[test]
fn scan_with_empty_grid_exits_one() {
    let run = Run::new(CONSTANT_4);
    assert_eq!(code(&run.exec("scan", &["--points", "0"])), 1);
}

#[test]
fn artifacts_are_deterministic() {
    let run = Run::new(CONSTANT_4);
    assert_eq!(code(&run.exec("solve", &["--jobs", "1"])), 0);
    let first: Vec<String> = ["scan.csv", "root.json", "solution.csv"].map(|f| run.read(f)).to_vec();
    assert_eq!(code(&run.exec("solve", &["--jobs", "4"])), 0);
    let second: Vec<String> = ["scan.csv", "root.json", "solution.csv"].map(|f| run.read(f)).to_vec();
    assert_eq!(first, second);

    let v = Run::new(r#"{"n": 3, "curvature": {"family": "power", "K0": 3, "K_rho": 1, "rho": 2}}"#);
    v.exec("verify", &["--jobs", "3"]);
    let a = v.read("report.json");
    v.exec("verify", &["--jobs", "1"]);
    assert_eq!(a, v.read("report.json"));
}

#[test]
fn verify_constant_curvature_in_three_dimensions() {
    let run = Run::new(r#"{"n": 3, "curvature": {"family": "constant", "K0": 3}}"#);
    let out = run.exec("verify", &[]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let report = run.json("report.json");
    assert_eq!(report["passed"], true);
    let closed = check(&report, "closed_form");
    assert_eq!(closed["status"], "pass");
    assert!(closed["measured"].as_f64().unwrap() < 1e-8);
    assert_eq!(check(&report, "params_identities")["detail"], "p = 5, β = 2");
}

#[test]
fn verify_gates_ratio_checks_for_tables() {
    let run = Run::new(r#"{"n": 5, "curvature": {"family": "table", "knots": [0, 0.4, 1], "values": [15, 10, 20]}}"#);
    run.exec("verify", &[]);
    let report = run.json("report.json");
    for name in ["ratio_limit", "ratio_logderiv", "ratio_gluing_sign"] {
        let c = check(&report, name);
        assert_eq!(c["status"], "skipped");
        assert!(c["detail"].as_str().unwrap().starts_with("hypothesis"));
    }
    for name in ["apriori_bound", "oracle_equivalence"] {
        assert_eq!(check(&report, name)["status"], "pass");
    }
}

#[test]
fn seed_comes_from_environment() {
    let run = Run::new(CONSTANT_4);
    run.exec_env("verify", &[], Some("42"));
    assert_eq!(run.json("report.json")["seed"], 42);
    assert_eq!(code(&run.exec_env("verify", &[], Some("nope"))), 1);
}
