use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_budgetopt"));
    c.env_remove("BUDGETOPT_JOBS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

const TRIANGLE: &str = r#"{
  "alpha": 1.0, "beta": 1.0, "kind": "complete", "n": 3, "r": 1, "seed": 0,
  "edges": [[0, 1, 1.0, [5.0]], [0, 2, 5.0, [1.0]], [1, 2, 1.0, [5.0]]]
}"#;

fn triangle(dir: &Path) -> PathBuf {
    let path = dir.join("triangle.json");
    fs::write(&path, TRIANGLE).unwrap();
    path
}

fn read_json(path: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn gen_is_deterministic_and_validates_n() {
    let dir = tempfile::tempdir().unwrap();
    let a = p(dir.path(), "a.json");
    let b = p(dir.path(), "b.json");
    let args = |out: &str| vec!["gen", "--kind", "complete", "--n", "3", "--alpha", "1", "--beta", "1", "--r", "1", "--seed", "1", "--out", out]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>();
    assert_eq!(code(&bin().args(args(&a)).output().unwrap()), 0);
    assert_eq!(code(&bin().args(args(&b)).output().unwrap()), 0);
    let inst = read_json(&a);
    assert_eq!(inst["edges"].as_array().unwrap().len(), 3);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let manifest = read_json(&format!("{a}.manifest.json"));
    assert_eq!(manifest["command"], "gen");
    assert_eq!(manifest["outputs"][&a]["sha256"].as_str().unwrap().len(), 64);

    let one = run(&["gen", "--kind", "complete", "--n", "1", "--alpha", "1", "--beta", "1", "--r", "1", "--seed", "1", "--out", &a]);
    assert_eq!(code(&one), 2);
    let bad = run(&["gen", "--kind", "torus", "--n", "3"]);
    assert_eq!(code(&bad), 2);
}

#[test]
fn binary_instances_solve_like_json() {
    let dir = tempfile::tempdir().unwrap();
    let j = p(dir.path(), "i.json");
    let b = p(dir.path(), "i.bin");
    for (out, extra) in [(&j, None), (&b, Some("--binary"))] {
        let mut args = vec!["gen", "--kind", "bipartite", "--n", "40", "--alpha", "1", "--beta", "1", "--r", "2", "--seed", "7", "--out", out];
        args.extend(extra);
        assert_eq!(code(&run(&args)), 0);
    }
    let sj = p(dir.path(), "sj.json");
    let sb = p(dir.path(), "sb.json");
    assert_eq!(code(&run(&["solve", "--problem", "cap", "--in", &j, "--budget", "40,40", "--out", &sj])), 0);
    assert_eq!(code(&run(&["solve", "--problem", "cap", "--in", &b, "--budget-product", "1600", "--out", &sb])), 0);
    assert_eq!(read_json(&sj)["weight"], read_json(&sb)["weight"]);
}

#[test]
fn triangle_solves() {
    let dir = tempfile::tempdir().unwrap();
    let tri = triangle(dir.path());
    let tri = tri.to_str().unwrap();
    let h = p(dir.path(), "h.json");
    let out = run(&["solve", "--problem", "cmwp", "--in", tri, "--budget", "10", "--L", "0.5", "--out", &h]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let heur = read_json(&h);
    assert_eq!(heur["weight"].as_f64(), Some(2.0));

    let e = p(dir.path(), "e.json");
    assert_eq!(code(&run(&["solve", "--problem", "cmwp", "--in", tri, "--budget", "10", "--exact", "--out", &e])), 0);
    let exact = read_json(&e);
    assert_eq!(exact["method"], "exact");
    assert!(exact["optimum"].as_f64().unwrap() <= heur["weight"].as_f64().unwrap());

    let tight = run(&["solve", "--problem", "cmwp", "--in", tri, "--budget", "0.0001", "--out", &e]);
    assert_eq!(code(&tight), 10);
    let tight_exact = run(&["solve", "--problem", "cmwp", "--in", tri, "--budget", "0.0001", "--exact", "--out", &e]);
    assert_eq!(code(&tight_exact), 10);
    assert_eq!(read_json(&e)["feasible"], false);
}

#[test]
fn kind_mismatch_and_resource_codes() {
    let dir = tempfile::tempdir().unwrap();
    let tri = triangle(dir.path());
    let out = p(dir.path(), "o.json");
    let r = run(&["solve", "--problem", "cap", "--in", tri.to_str().unwrap(), "--budget", "1", "--out", &out]);
    assert_eq!(code(&r), 4);

    let big = p(dir.path(), "big.json");
    assert_eq!(
        code(&run(&["gen", "--kind", "digraph", "--n", "14", "--alpha", "1", "--beta", "1", "--r", "1", "--seed", "2", "--out", &big])),
        0
    );
    let r = run(&["solve", "--problem", "catsp", "--in", &big, "--budget", "14", "--exact", "--out", &out]);
    assert_eq!(code(&r), 3);
    let r = run(&["solve", "--problem", "cap", "--in", "/nonexistent/x.json", "--budget", "1", "--out", &out]);
    assert_eq!(code(&r), 2);
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn synthetic_sweep_gives_slope_minus_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("synthetic.toml");
    let out = run(&["sweep", "--config", cfg.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap(), "--gnuplot-style"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let summary = read_json(&p(dir.path(), "summary.json"));
    let slope = summary["fitted_slope"].as_f64().unwrap();
    assert!((slope + 2.0).abs() < 1e-12);
    assert!(fs::read_to_string(dir.path().join("points.dat")).unwrap().starts_with("# axis_value"));
    let manifest = read_json(&p(dir.path(), "manifest.json"));
    assert_eq!(manifest["outputs"].as_object().unwrap().len(), 3);
}

#[test]
fn sweep_output_ignores_job_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    fs::write(
        &cfg,
        "problem = \"cmp\"\nsweep_axis = \"n\"\naxis_values = [20, 40, 80]\ntrials_per_point = 3\nbase_seed = 5\n\
         [params]\nalpha = 0.5\nbeta = 1.0\nr = 2\n[budget_rule]\npreset = \"dense\"\n",
    )
    .unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(code(&run(&["sweep", "--config", cfg.to_str().unwrap(), "--out-dir", a.to_str().unwrap(), "--jobs", "1"])), 0);
    let env_run = bin()
        .env("BUDGETOPT_JOBS", "3")
        .args(["sweep", "--config", cfg.to_str().unwrap(), "--out-dir", b.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&env_run), 0);
    assert_eq!(fs::read(a.join("trials.csv")).unwrap(), fs::read(b.join("trials.csv")).unwrap());
    assert_eq!(fs::read(a.join("summary.json")).unwrap(), fs::read(b.join("summary.json")).unwrap());
}

#[test]
fn config_errors_exit_two_with_a_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "problem = \"cap\"\nsweep_axis = \"n\"\naxis_values = [10, 20, 40]\ntrials_per_point = 1\nbase_seed = 1\nbogus_field = 3\n").unwrap();
    let out = run(&["sweep", "--config", cfg.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("bogus_field") && msg.contains("line"), "{msg}");
}

#[test]
fn lemmas_report_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = p(dir.path(), "a.json");
    let b = p(dir.path(), "b.json");
    let args = |o: &str| {
        ["lemmas", "--seed", "4", "--samples", "100000", "--capexp-n", "200", "--capexp-trials", "3", "--out", o]
            .map(String::from)
            .to_vec()
    };
    let ra = bin().args(args(&a)).output().unwrap();
    assert_eq!(code(&ra), 0, "{}", String::from_utf8_lossy(&ra.stderr));
    assert_eq!(code(&bin().args(args(&b)).output().unwrap()), 0);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let rep = read_json(&a);
    for key in ["order_stat_exact", "split_order_stat", "erlang_power_bound", "order_stat_asymptotic"] {
        assert!(!rep["lemmas"][key].as_array().unwrap().is_empty(), "{key}");
    }
    assert!(rep["capexp"]["rows"].as_array().unwrap().len() == 4);
}
