use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn scbec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scbec"))
        .args(args)
        .output()
        .expect("spawn scbec")
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("scbec-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

/// Data rows of a headed CSV as (column name -> values).
fn csv_column(text: &str, name: &str) -> Vec<f64> {
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# scbec "));
    let cols: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = cols.iter().position(|c| *c == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

#[test]
fn threshold_json_carries_header() {
    let v = stdout_json(&scbec(&["threshold", "--l", "3", "--r", "6", "--L", "20", "--seed", "7"]));
    assert_eq!(v["header"]["version"], scbec::VERSION);
    assert_eq!(v["header"]["seed"], 7);
    assert_eq!(v["header"]["config"]["L"], 20);
    let e = v["result"]["eps_star"].as_f64().unwrap();
    assert!((e - 0.48825).abs() < 5e-4, "{e}");
}

#[test]
fn invalid_ensemble_is_a_config_error() {
    let out = scbec(&["threshold", "--l", "3", "--r", "5", "--L", "10"]);
    assert_eq!(out.status.code(), Some(2));
    let out = scbec(&["simulate", "--L", "10", "--eps", "0.4"]);
    assert_eq!(out.status.code(), Some(2), "missing size");
    let out = scbec(&["simulate", "--L", "10", "--M", "100", "--eps", "0.4", "--decoder", "spd"]);
    assert_eq!(out.status.code(), Some(2));
    let out = scbec(&["threshold", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_input_is_a_runtime_error() {
    let out = scbec(&["fit", "--batch", "/nonexistent/batch.json"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn de_and_ge_trajectories_agree() {
    let (de, ge) = (tmp("de.csv"), tmp("ge.csv"));
    let base = ["--l", "3", "--r", "6", "--L", "50", "--eps", "0.45", "--out"];
    let mut a = vec!["de"];
    a.extend(base);
    a.push(de.to_str().unwrap());
    assert!(scbec(&a).status.success());
    let mut a = vec!["ge"];
    a.extend(base);
    a.push(ge.to_str().unwrap());
    assert!(scbec(&a).status.success());
    let d = csv_column(&std::fs::read_to_string(de).unwrap(), "eps");
    let g = csv_column(&std::fs::read_to_string(ge).unwrap(), "unresolved_fraction");
    let n = d.len().min(g.len());
    assert!(n > 50 && d.len() == g.len());
    for l in 0..n {
        assert!((d[l] - g[l]).abs() < 1e-6, "iteration {l}: {} vs {}", d[l], g[l]);
    }
}

#[test]
fn equiv_passes_random_and_exhaustive() {
    let out = scbec(&["equiv", "--l", "3", "--r", "6", "--L", "5", "--N", "32", "--trials", "200", "--eps", "0.45"]);
    let v = stdout_json(&out);
    assert_eq!(v["result"]["cases"], 200);
    assert_eq!(v["result"]["mismatches"], 0);
    let out = scbec(&["equiv", "--L", "3", "--N", "2", "--exhaustive", "--spd-runs", "1"]);
    let v = stdout_json(&out);
    assert_eq!(v["result"]["cases"], 4096);
}

#[test]
fn simulate_output_is_independent_of_workers() {
    let run = |w: &str| {
        let out = scbec(&["simulate", "--L", "10", "--M", "200", "--eps", "0.44", "--trials", "40", "--seed", "3", "--workers", w]);
        assert!(out.status.success());
        out.stdout
    };
    let one = run("1");
    assert_eq!(one, run("3"));
    let text = String::from_utf8(one).unwrap();
    assert!(text.starts_with("# scbec ") && text.contains("seed=3"));
}

#[test]
fn simulate_fit_predict_pipeline() {
    let (batch, fit) = (tmp("batch.json"), tmp("fit.json"));
    let out = scbec(&[
        "simulate", "--L", "30", "--M", "1000", "--eps", "0.45", "--trials", "100", "--out",
        batch.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let out = scbec(&["fit", "--batch", batch.to_str().unwrap(), "--out", fit.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&fit).unwrap()).unwrap();
    let gamma = v["result"]["fit"]["gamma"].as_f64().unwrap();
    assert!(gamma > 4.0 && gamma < 6.5, "{gamma}");
    let out = scbec(&[
        "predict", "--L", "30", "--fit", fit.to_str().unwrap(), "--eps", "0.46,0.47", "--tau-corr", "1.37",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(out.status.success());
    assert_eq!(csv_column(&text, "p_block").len(), 2);
}

#[test]
fn predict_with_reference_parameters_is_monotone() {
    let out = scbec(&[
        "predict", "--L", "100", "--M", "2000", "--eps", "0.46,0.465,0.47,0.475", "--gamma", "5.2", "--alpha", "6.376",
        "--theta", "2.0", "--tau-corr", "1.37", "--eps-star", "0.4881",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let p = csv_column(&String::from_utf8(out.stdout).unwrap(), "p_block");
    assert_eq!(p.len(), 4);
    assert!(p.iter().all(|&x| x > 0.0 && x < 1.0), "{p:?}");
    assert!(p.windows(2).all(|w| w[0] < w[1]), "{p:?}");
}
