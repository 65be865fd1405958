use std::process::{Command, Output};

use serde_json::Value;

fn chylab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chylab")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn compare_reports_max_deviation() {
    let out = chylab(&["amplitude", "compare", "--n", "5", "--trials", "20", "--seed", "1", "--json"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["command"], "amplitude compare");
    assert_eq!(v["results"]["points"].as_array().unwrap().len(), 20);
    assert!(v["results"]["max_rel_deviation"].as_f64().unwrap() < 1e-8);
    assert_eq!(v["passed"], true);
}

#[test]
fn solve_json_is_byte_identical_across_runs() {
    let args = ["solve", "--n", "6", "--seed", "7", "--json"];
    let (a, b) = (chylab(&args), chylab(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    let sols = v["results"]["solutions"].as_array().unwrap();
    assert_eq!(sols.len(), 6);
    // three free punctures, each as [re, im]
    assert!(sols.iter().all(|s| s.as_array().unwrap().len() == 3));
    assert_eq!(v["results"]["residuals"].as_array().unwrap().len(), 6);
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["sectors", "census", "--n", "6", "--trials", "4", "--seed", "2", "--json"];
    let one = Command::new(env!("CARGO_BIN_EXE_chylab")).args(args).env("CHYLAB_THREADS", "1").output().unwrap();
    let two = Command::new(env!("CARGO_BIN_EXE_chylab")).args(args).env("CHYLAB_THREADS", "2").output().unwrap();
    let strip = |o: &Output| {
        let mut v = json(o);
        v["config"].as_object_mut().unwrap().remove("threads");
        v
    };
    assert_eq!(strip(&one), strip(&two));
    assert_eq!(strip(&one)["passed"], true);
}

#[test]
fn generated_kinematics_feed_other_commands() {
    let dir = std::env::temp_dir().join(format!("chylab-it-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("pt.json");
    let gen = chylab(&["kinematics", "gen", "--n", "6", "--seed", "7", "--range", "10", "--json"]);
    assert!(gen.status.success());
    std::fs::write(&path, &gen.stdout).unwrap();
    let p = path.to_str().unwrap();
    let feynman = json(&chylab(&["amplitude", "feynman", "--n", "6", "--x-file", p, "--json"]));
    let chy = json(&chylab(&["amplitude", "chy", "--x-file", p, "--json"]));
    let f = feynman["results"]["value"].as_f64().unwrap();
    let re = chy["results"]["chy"][0].as_f64().unwrap();
    assert!((re + f).abs() < 1e-8 * f.abs(), "even n carries a minus sign: {re} vs {f}");
    // --n must agree with the file
    assert_eq!(chylab(&["amplitude", "feynman", "--n", "5", "--x-file", p]).status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn usage_and_numerical_errors() {
    let out = chylab(&["solve", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(chylab(&["binary", "check", "--name", "nonagon"]).status.code(), Some(2));
    let out = chylab(&["sectors", "census", "--n", "9"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["error"]["kind"], "unsupported");
}

#[test]
fn every_subcommand_runs() {
    let cases: &[&[&str]] = &[
        &["uequations", "check", "--n", "6"],
        &["binary", "check", "--name", "hexagon"],
        &["trop", "amplitude", "--n", "6"],
        &["scatform", "pullback", "--n", "5", "--seed", "3"],
        &["scatmap", "check", "--n", "6", "--samples", "100"],
        &["string", "eval", "--n", "5", "--alpha", "0.05", "--seed", "3"],
        &["amplitude", "partial", "--n", "5", "--seed", "2"],
        &["mhv", "check", "--n", "5", "--seed", "2"],
        &["accept", "--only", "6"],
    ];
    for args in cases {
        let mut full = args.to_vec();
        full.push("--json");
        let out = chylab(&full);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stdout));
        let v = json(&out);
        assert_ne!(v["passed"], false, "{args:?}");
    }
}
