use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;
use wallcross_cli::{run_from_args, Outcome};
use wallcross_core::series::{TruncatedSeries, TruncationPolicy};

fn model(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models").join(name);
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Outcome {
    run_from_args(std::iter::once("wallcross").chain(args.iter().copied()))
}

fn json(out: &Outcome) -> Value {
    serde_json::from_str(&out.stdout).unwrap_or_else(|e| panic!("not JSON ({e}): {}", out.stdout))
}

#[test]
fn vdim_of_quintic_genus_one() {
    let out = run(&["vdim", "--model", &model("quintic.json"), "--gamma", "g=1;|2,2,2,2,2"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert_eq!(out.stdout, "ordinary: 0\nmaster: 1\n");
}

#[test]
fn ifunc_json_arrays() {
    let out = run(&["ifunc", "--model", &model("quintic.json"), "--max-deg", "10", "--format", "json"]);
    assert_eq!(out.code, 0);
    let v = json(&out);
    let i0 = v["I0"].as_array().unwrap();
    let i1 = v["I1"].as_array().unwrap();
    assert_eq!((i0.len(), i1.len()), (11, 11));
    assert_eq!(i0[0], "1");
    assert_eq!(i0[5], "1/375000");
    assert_eq!(i1[1], "1");
    assert_eq!(i1[6], "2/140625");
}

#[test]
fn toml_and_json_models_agree() {
    let a = run(&["mu", "--model", &model("spin5.toml"), "--max-deg", "3"]);
    std::fs::write(std::env::temp_dir().join("wallcross_spin5.json"), r#"{"r":5,"weights":[1]}"#).unwrap();
    let path = std::env::temp_dir().join("wallcross_spin5.json");
    let b = run(&["mu", "--model", path.to_str().unwrap(), "--max-deg", "3"]);
    assert_eq!(a.code, 0);
    assert_eq!(a, b);
}

#[test]
fn emitted_series_reparse_to_identical_json() {
    let out = run(&["mu", "--model", &model("cubic.toml"), "--max-deg", "4", "--format", "json"]);
    let v = json(&out);
    let policy = TruncationPolicy::new(4, 0, -100, 100, 0);
    for comp in v["components"].as_array().unwrap() {
        let s = TruncatedSeries::from_json(&comp["series"], policy).unwrap();
        assert_eq!(s.to_json(), comp["series"]);
    }
}

#[test]
fn mu_parts_split_the_series() {
    let m = model("spin5.toml");
    let plus = run(&["mu", "--model", &m, "--max-deg", "4", "--part", "plus"]);
    let minus = run(&["mu", "--model", &m, "--max-deg", "4", "--part", "minus"]);
    assert!(!plus.stdout.contains("z^-"));
    assert!(minus.stdout.contains("z^-"));
}

#[test]
fn wallcross_check_exits_zero() {
    let out = run(&["check", "wallcross", "--model", &model("quintic.json"), "--genus", "2", "--t-deg", "6", "--u-deg", "2"]);
    assert_eq!(out.code, 0, "{}", out.stdout);
}

#[test]
fn failed_checks_exit_one_with_json() {
    let out = run(&[
        "check", "wallcross", "--model", &model("spin5.toml"), "--genus", "1", "--t-deg", "3", "--u-deg", "1", "--perturb",
    ]);
    assert_eq!(out.code, 1);
    let v = json(&out);
    assert_eq!(v["passed"], false);
    assert!(!v["mismatches"].as_array().unwrap().is_empty());

    let out = run(&["check", "dilaton", "--model", &model("quintic.json"), "--genus", "2", "--t-deg", "6", "--perturb"]);
    assert_eq!(out.code, 1);
    json(&out);
}

#[test]
fn passing_checks_exit_zero() {
    let q = model("quintic.json");
    let s = model("spin5.toml");
    for args in [
        vec!["check", "dilaton", "--model", &q, "--genus", "1", "--t-deg", "6"],
        vec!["check", "genus0", "--model", &s, "--t-deg", "3"],
        vec!["check", "residue", "--model", &q, "--gamma", "g=1;2|2,3,4", "--d", "1,0,2"],
        vec!["check", "residue", "--model", &s, "--gamma", "g=0;3|2,2,4", "--genus0"],
        vec!["check", "mu-aggregation", "--model", &q, "--max-deg", "4"],
        vec!["jfunc", "--model", &s, "--t-deg", "3", "--u-deg", "1"],
    ] {
        let out = run(&args);
        assert_eq!(out.code, 0, "{args:?}: {}{}", out.stdout, out.stderr);
    }
}

#[test]
fn scalar_commands() {
    let q = model("quintic.json");
    assert_eq!(run(&["selection", "--model", &q, "--gamma", "g=0;|2,2,2"]).stdout, "true\n");
    assert_eq!(run(&["selection", "--model", &q, "--gamma", "g=0;|2,2"]).stdout, "false\n");
    let classify = run(&["classify", "--model", &q, "--format", "csv"]);
    assert_eq!(classify.stdout.lines().last(), Some("5,broad"));
    let nd = json(&run(&["node-data", "--model", &model("cubic.toml"), "--J", "2,3", "--format", "json"]));
    assert_eq!((nd["node_k"].as_u64(), nd["node_ell"].as_u64()), (Some(1), Some(1)));
    let fp = json(&run(&["fixed-points", "--model", &q, "--gamma", "g=1;|2,2,2", "--format", "json"]));
    // F0, Finf and the three subsets J with {1} < J.
    assert_eq!(fp["fixed_points"].as_array().unwrap().len(), 5);
    let eps = run(&["epsilon", "--model", &q, "--gamma", "g=1;|2,2,2,2,2"]);
    assert_eq!(eps.code, 0);
}

#[test]
fn bad_input_exits_two() {
    let q = model("quintic.json");
    for args in [
        vec!["mu", "--model", "/nonexistent.json", "--max-deg", "2"],
        vec!["mu", "--model", &q, "--max-deg", "13"],
        vec!["vdim", "--model", &q, "--gamma", "g=1;2,2"],
        vec!["fixed-points", "--model", &q, "--gamma", "g=1;|2,2,2,2,2,2,2,2,2,2,2"],
        vec!["frobnicate"],
    ] {
        let out = run(&args);
        assert_eq!(out.code, 2, "{args:?}");
        assert!(out.stdout.is_empty());
        assert!(!out.stderr.is_empty());
    }
    let dir = std::env::temp_dir().join("wallcross_bad_model.json");
    std::fs::write(&dir, r#"{"r": 1, "weights": [1]}"#).unwrap();
    assert_eq!(run(&["classify", "--model", dir.to_str().unwrap()]).code, 2);
}

#[test]
fn binary_matches_library_and_is_deterministic() {
    let bin = env!("CARGO_BIN_EXE_wallcross");
    let args = ["mu", "--model", &model("quintic.json"), "--max-deg", "3", "--format", "csv"];
    let a = Command::new(bin).args(args).output().unwrap();
    let b = Command::new(bin).args(args).output().unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(String::from_utf8(a.stdout).unwrap(), run(&args).stdout);
    let bad = Command::new(bin).args(["vdim", "--model", "/nope"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
