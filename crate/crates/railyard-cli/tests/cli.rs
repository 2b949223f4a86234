use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use railyard_core::railyard::validate;
use railyard_core::{CoveringState, GraphConfig};
use serde_json::Value;
use tempfile::TempDir;

const PERIODIC: &str = r#"
breaks = [0.0, 1.0]
tau = [1.0, 0.3, 0.3, 1.0]
a = "LLRR"
b = ["-++-"]
u = 0.1
v = 0.1
K = 3
"#;

fn railyard(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_railyard")).current_dir(dir).args(args).output().expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn graph_toml(a: &str, b: &str, x: &[&str], u: &str, v: &str) -> String {
    let x: Vec<String> = x.iter().map(|s| format!("{s:?}")).collect();
    format!("a = {a:?}\nb = {b:?}\nx = [{}]\nu = {u:?}\nv = {v:?}\n", x.join(", "))
}

fn states(path: &Path) -> Vec<CoveringState> {
    fs::read_to_string(path).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path).unwrap().lines().map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn sample_writes_valid_coverings() {
    let dir = TempDir::new().unwrap();
    let cfg_text = graph_toml("LRL", "+-+", &["1/2", "1/3", "1/2"], "3/10", "3/10");
    write(dir.path(), "g.toml", &cfg_text);
    ok(&railyard(dir.path(), &["sample", "--config", "g.toml", "--K", "3", "--n", "10", "--seed", "1"]));
    let g = toml::from_str::<GraphConfig>(&cfg_text).unwrap().build().unwrap();
    let s = states(&dir.path().join("samples.jsonl"));
    assert_eq!(s.len(), 10);
    assert!(s.iter().all(|s| validate(&g, s).unwrap()));
}

#[test]
fn sample_is_deterministic_and_replayable() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "g.toml", &graph_toml("LR", "+-", &["1/2", "1/2"], "3/10", "3/10"));
    let args = ["sample", "--config", "g.toml", "--K", "3", "--n", "50", "--seed", "9", "--out", "a.jsonl", "--svg-dir", "svg"];
    ok(&railyard(dir.path(), &args));
    let first = fs::read(dir.path().join("a.jsonl")).unwrap();
    ok(&railyard(dir.path(), &args));
    assert_eq!(first, fs::read(dir.path().join("a.jsonl")).unwrap());
    assert!(dir.path().join("svg/sample_00049.svg").exists());

    let manifest: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("a.jsonl.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 9);
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 51);
    assert_eq!(manifest["config_digest"].as_str().unwrap().len(), 64);
    ok(&railyard(dir.path(), &["replay", "a.jsonl.manifest.json"]));

    // Replay regenerates outputs before checking them, so a tampered file is restored.
    fs::write(dir.path().join("a.jsonl"), "{}\n").unwrap();
    ok(&railyard(dir.path(), &["replay", "a.jsonl.manifest.json"]));
    assert_eq!(first, fs::read(dir.path().join("a.jsonl")).unwrap());
    // A changed input is reported.
    write(dir.path(), "g.toml", &graph_toml("LR", "+-", &["1/2", "1/3"], "3/10", "3/10"));
    assert_ne!(code(&railyard(dir.path(), &["replay", "a.jsonl.manifest.json"])), 0);
}

#[test]
fn zero_fugacity_pins_the_boundaries() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "g.toml", &graph_toml("LRL", "+-+", &["1/2", "1/2", "1/2"], "0", "0"));
    ok(&railyard(dir.path(), &["sample", "--config", "g.toml", "--K", "2", "--n", "100", "--seed", "3"]));
    for s in states(&dir.path().join("samples.jsonl")) {
        assert!(s.seq.first().unwrap().is_empty() && s.seq.last().unwrap().is_empty());
    }
}

#[test]
fn explicit_manifest_path() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "g.toml", &graph_toml("LR", "+-", &["1/2", "1/2"], "0", "0"));
    ok(&railyard(dir.path(), &["--manifest", "run.json", "--threads", "2", "sample", "--config", "g.toml", "--K", "1", "--n", "2", "--seed", "0"]));
    let m: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("run.json")).unwrap()).unwrap();
    assert_eq!(m["command_line"][0], "--manifest");
}

#[test]
fn pure_partition_function_is_exact() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "g.toml", &graph_toml("LR", "+-", &["1/2", "1/2"], "0", "0"));
    let out: Value = serde_json::from_str(&ok(&railyard(dir.path(), &["partition-function", "--config", "g.toml", "--mode", "pure"]))).unwrap();
    assert_eq!(out["exact"], "5/4");
    assert_eq!(out["value"], 1.25);
}

#[test]
fn oracle_increases_towards_the_free_free_value() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "g.toml", &graph_toml("LRL", "+--", &["1/2", "1/3", "1/2"], "3/10", "3/10"));
    let ff: Value = serde_json::from_str(&ok(&railyard(dir.path(), &["partition-function", "--config", "g.toml", "--mode", "free-free", "--out", "ff.json"]))).unwrap();
    assert!(dir.path().join("ff.json").exists());
    let oracle: Value = serde_json::from_str(&ok(&railyard(dir.path(), &["partition-function", "--config", "g.toml", "--mode", "oracle", "--bound", "6"]))).unwrap();
    let z = ff["value"].as_f64().unwrap();
    let vals: Vec<f64> = oracle["bounds"].as_array().unwrap().iter().map(|r| r["value"].as_f64().unwrap()).collect();
    assert!(vals.windows(2).all(|w| w[0] < w[1]));
    let gaps: Vec<f64> = vals.iter().map(|v| z - v).collect();
    assert!(gaps.iter().all(|&g| g > -1e-12));
    assert!(gaps.windows(2).all(|w| w[1] < w[0]));
    assert!(gaps.last().unwrap() / z < 1e-3);
}

#[test]
fn error_exit_codes() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "div.toml", &graph_toml("LR", "+-", &["1/2", "1/2"], "1", "1"));
    assert_eq!(code(&railyard(dir.path(), &["partition-function", "--config", "div.toml", "--mode", "free-free"])), 3);
    write(dir.path(), "pole.toml", &graph_toml("LL", "+-", &["1", "1"], "0", "0"));
    assert_eq!(code(&railyard(dir.path(), &["partition-function", "--config", "pole.toml", "--mode", "pure"])), 3);
    write(dir.path(), "bad.toml", "a = \"LQ\"\nb = \"+-\"\nx = [1, 1]\n");
    assert_eq!(code(&railyard(dir.path(), &["partition-function", "--config", "bad.toml", "--mode", "pure"])), 2);
    write(dir.path(), "broken.toml", "a = [");
    assert_eq!(code(&railyard(dir.path(), &["sample", "--config", "broken.toml", "--K", "1", "--n", "1", "--seed", "0"])), 2);
    assert_eq!(code(&railyard(dir.path(), &["sample", "--config", "missing.toml", "--K", "1", "--n", "1", "--seed", "0"])), 2);
    assert_eq!(code(&railyard(dir.path(), &["density", "--params", "p.toml"])), 2);
}

#[test]
fn density_map_stays_in_range() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "p.toml", PERIODIC);
    ok(&railyard(dir.path(), &["density", "--params", "p.toml", "--chi-grid", "0.05:0.95:7", "--kappa-grid", "-1:1:9"]));
    let rows = csv_rows(&dir.path().join("density.csv"));
    assert_eq!(rows[0], ["chi", "kappa", "value"]);
    assert_eq!(rows.len(), 1 + 63);
    for r in &rows[1..] {
        let d: f64 = r[2].parse().unwrap();
        assert!((0.0..=2.0).contains(&d));
    }
}

#[test]
fn frozen_boundary_csv_and_svg() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "p.toml", PERIODIC);
    ok(&railyard(dir.path(), &["frozen-boundary", "--params", "p.toml", "--w-grid", "log:1e-3:1e3:60", "--svg", "b.svg"]));
    let rows = csv_rows(&dir.path().join("boundary.csv"));
    assert_eq!(rows[0], ["chi", "kappa", "w"]);
    assert!(rows.len() > 20);
    for r in &rows[1..] {
        let chi: f64 = r[0].parse().unwrap();
        assert!(chi > 0.0 && chi < 1.0);
    }
    let svg = fs::read_to_string(dir.path().join("b.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains(">χ</text>") && svg.contains(">κ</text>"));
    assert!(svg.matches("<circle").count() == rows.len() - 1);
}

#[test]
fn laplace_check_reports_a_small_gap() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "p.toml", PERIODIC);
    let out: Value = serde_json::from_str(&ok(&railyard(dir.path(), &["laplace-check", "--params", "p.toml", "--chi", "0.5", "--alpha", "1", "--points", "2000"]))).unwrap();
    let gap = out[0]["rel_gap"].as_f64().unwrap();
    assert!(gap < 1e-3, "gap {gap}");
    // A non-integer power is not single-valued on the contour.
    let out = railyard(dir.path(), &["laplace-check", "--params", "p.toml", "--chi", "0.5", "--alpha", "0.5", "--points", "500"]);
    assert_eq!(code(&out), 2);
}

fn summary(dir: &Path, seed: &str) -> Value {
    let samples = format!("s{seed}.jsonl");
    ok(&railyard(dir, &["sample", "--family", "p.toml", "--columns", "24", "--K", "3", "--n", "200", "--seed", seed, "--out", &samples]));
    let out = ok(&railyard(dir, &[
        "compare", "--samples", &samples, "--params", "p.toml", "--columns", "24",
        "--chi-grid", "0.25:0.75:3", "--kappa-grid", "-0.8:0.8:5", "--band", "0", "--out", &format!("c{seed}.csv"),
    ]));
    serde_json::from_str(&out).unwrap()
}

#[test]
fn compare_is_consistent_across_seeds() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "p.toml", PERIODIC);
    let (a, b) = (summary(dir.path(), "1"), summary(dir.path(), "2"));
    assert_eq!(a["points"], 15);
    let (ma, mb) = (a["mean_abs_deviation"].as_f64().unwrap(), b["mean_abs_deviation"].as_f64().unwrap());
    // 200 samples at mesh 1/24: the Monte Carlo error of ε·h̄ is a few 1e−3.
    assert!((ma - mb).abs() < 0.02, "{ma} vs {mb}");
    let rows = csv_rows(&dir.path().join("c1.csv"));
    assert_eq!(rows[0], ["chi", "kappa", "empirical", "limit", "in_band"]);
}

#[test]
fn compare_rejects_bad_inputs() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "p.toml", PERIODIC);
    write(dir.path(), "empty.jsonl", "");
    let base = ["compare", "--params", "p.toml", "--chi-grid", "0.5:0.5:1", "--kappa-grid", "0:0:1", "--band", "0"];
    let run = |samples: &str, cols: &str| {
        let mut args = base.to_vec();
        args.extend(["--samples", samples, "--columns", cols]);
        code(&railyard(dir.path(), &args))
    };
    assert_eq!(run("empty.jsonl", "12"), 2);
    ok(&railyard(dir.path(), &["sample", "--family", "p.toml", "--columns", "12", "--K", "2", "--n", "3", "--seed", "0", "--out", "s.jsonl"]));
    assert_eq!(run("s.jsonl", "16"), 2);
    assert_eq!(run("s.jsonl", "12"), 0);
}
