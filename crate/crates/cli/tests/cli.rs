use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_avalanche"))
        .args(args)
        .env_remove("AVALANCHE_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

fn strings(v: &Value) -> Vec<&str> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_str().unwrap())
        .collect()
}

#[test]
fn identity_examples() {
    let v = json_of(&run(&["identity", "--n", "4"]));
    assert_eq!(v["lhs"], "125");
    assert_eq!(v["rhs"], "125");
    assert_eq!(v["equal"], true);

    let v = json_of(&run(&["identity", "--n", "3", "--s", "2"]));
    assert_eq!(v["partial"], "10");
    assert_eq!(v["remainder"], "6");

    let v = json_of(&run(&["identity", "--n", "2", "--forest"]));
    assert_eq!(v["lhs"], "3");
    assert_eq!(v["rhs"], "3");
}

#[test]
fn identity_rejects_zero() {
    let out = run(&["identity", "--n", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn trees_census_csv() {
    let out = run(&["trees", "--n", "3", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, "parts,count\n1-1-1,6\n1-2,3\n2-1,6\n3,1\n");
}

#[test]
fn trees_over_cap_is_resource_error() {
    let out = run(&["trees", "--n", "9"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn pmf_examples() {
    let v = json_of(&run(&[
        "pmf",
        "--model",
        "avalanche",
        "--N",
        "2",
        "--p",
        "1/4",
    ]));
    assert_eq!(strings(&v["probs"]), ["9/16", "1/4", "3/16"]);

    let v = json_of(&run(&[
        "pmf", "--model", "abelian", "--N", "2", "--p", "1/4",
    ]));
    assert_eq!(strings(&v["probs"]), ["2/3", "1/3"]);

    let v = json_of(&run(&[
        "pmf", "--model", "limit", "--alpha", "1", "--amax", "10",
    ]));
    let first = v["probs"][0].as_f64().unwrap();
    assert!((first - 0.3678794).abs() < 1e-7);
}

#[test]
fn pmf_domain_and_usage_errors() {
    let out = run(&["pmf", "--model", "avalanche", "--N", "3", "--p", "1/2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("1/N"));

    let out = run(&["pmf", "--model", "avalanche", "--N", "3", "--p", "0.1"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["pmf", "--model", "avalanche", "--p", "1/8"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_urn_histogram_sums_to_trials() {
    let v = json_of(&run(&[
        "simulate", "--model", "urn", "--N", "2", "--M", "4", "--trials", "1000", "--seed", "7",
    ]));
    let total: u64 = v["histogram"]
        .as_object()
        .unwrap()
        .values()
        .map(|c| c.as_u64().unwrap())
        .sum();
    assert_eq!(total, 1000);
}

#[test]
fn simulate_tower_exact_oracle() {
    let v = json_of(&run(&[
        "simulate",
        "--model",
        "tower",
        "--uniform",
        "8,1,3,3",
        "--trials",
        "100",
        "--exact-oracle",
    ]));
    assert_eq!(v["oracle"]["equal"], true);
    let pmf = json_of(&run(&[
        "pmf",
        "--model",
        "avalanche",
        "--N",
        "3",
        "--p",
        "1/8",
    ]));
    assert_eq!(v["oracle"]["bruteforce"]["probs"], pmf["probs"]);
}

#[test]
fn simulate_over_cap_is_resource_error() {
    let out = run(&[
        "--max-states",
        "100",
        "simulate",
        "--model",
        "urn",
        "--N",
        "3",
        "--M",
        "5",
        "--trials",
        "10",
        "--exact-oracle",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn tail_examples() {
    let v = json_of(&run(&["tail", "--alpha", "1", "--amax", "600"]));
    let row = &v["rows"][99];
    assert_eq!(row["a"], 100);
    assert!((row["a_log_ratio"].as_f64().unwrap() - 1.4770356).abs() < 1e-6);
    let slope = v["slope"].as_f64().unwrap();
    assert!((-1.55..=-1.45).contains(&slope));

    assert_eq!(run(&["tail", "--alpha", "0"]).status.code(), Some(2));
    assert_eq!(
        run(&["tail", "--alpha", "1", "--amax", "100"])
            .status
            .code(),
        Some(2)
    );
}

fn write_with(dir: &Path, name: &str, args: &[&str]) -> Vec<u8> {
    let path = dir.join(name);
    let mut full = vec!["--out", path.to_str().unwrap()];
    full.extend_from_slice(args);
    let out = run(&full);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    std::fs::read(path).unwrap()
}

#[test]
fn simulate_then_compare() {
    let dir = tempfile::tempdir().unwrap();
    write_with(
        dir.path(),
        "sim.json",
        &[
            "simulate", "--model", "urn", "--N", "4", "--M", "9", "--trials", "20000", "--seed",
            "3",
        ],
    );
    write_with(
        dir.path(),
        "pmf.json",
        &["pmf", "--model", "avalanche", "--N", "4", "--p", "1/9"],
    );
    let out = run(&[
        "compare",
        "--sim",
        dir.path().join("sim.json").to_str().unwrap(),
        "--pmf",
        dir.path().join("pmf.json").to_str().unwrap(),
    ]);
    let v = json_of(&out);
    assert!(v["tv"].as_f64().unwrap() < 0.02);
    assert_eq!(v["trials"], 20000);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "simulate", "--model", "tower", "--coord", "8,1,3", "--coord", "6,1,2", "--trials", "5000",
        "--seed", "11", "--shards", "3",
    ];
    let a = write_with(dir.path(), "a.json", &args);
    let b = write_with(dir.path(), "b.json", &args);
    assert_eq!(a, b);
}

#[test]
fn out_dir_env_and_flag_precedence() {
    let env_dir = tempfile::tempdir().unwrap();
    let flag_dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_avalanche"))
        .args(["--out", "id.json", "identity", "--n", "3"])
        .env("AVALANCHE_OUT_DIR", env_dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(env_dir.path().join("id.json").exists());

    let out = Command::new(env!("CARGO_BIN_EXE_avalanche"))
        .args(["--out", "id.json", "--out-dir"])
        .arg(flag_dir.path())
        .args(["identity", "--n", "3"])
        .env("AVALANCHE_OUT_DIR", env_dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(flag_dir.path().join("id.json").exists());
}
