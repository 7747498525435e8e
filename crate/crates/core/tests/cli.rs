//! Command-line behaviour: exit codes, report shape and file round trips.

use std::path::Path;
use std::process::Command;

use kvcert::cli::{run_with, EXIT_CHECK_FAILED, EXIT_PASS, EXIT_USAGE};
use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["kvcert"];
    full.extend_from_slice(args);
    let code = run_with(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn report(stdout: &str) -> Value {
    serde_json::from_str(stdout).expect("report is JSON")
}

fn path_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn bch_at_degree_three() {
    let (code, out, err) = run(&["bch", "--degree", "3"]);
    assert_eq!(code, EXIT_PASS, "{err}");
    let r = report(&out);
    assert_eq!(r["command"], "bch");
    assert_eq!(r["pass"], true);
    assert_eq!(r["config"]["degree"], 3);
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
    assert!(err.contains("bch: PASS"));
}

#[test]
fn zero_radius_has_zero_residual() {
    let (code, out, _) = run(&["kv", "verify", "--radius", "0", "--degree", "4"]);
    assert_eq!(code, EXIT_PASS);
    assert_eq!(report(&out)["checks"][0]["measured"], 0.0);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(run(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(run(&["--degree", "40", "bch"]).0, EXIT_USAGE);
    assert_eq!(run(&["--tol-nope=1", "bch"]).0, EXIT_USAGE);
    assert_eq!(run(&["--tol-det", "-1", "bch"]).0, EXIT_USAGE);
    assert_eq!(run(&["verify", "--cert", "/nonexistent/cert.json"]).0, EXIT_USAGE);
    assert_eq!(run(&["--help"]).0, EXIT_PASS);
}

#[test]
fn unmet_tolerance_exits_with_one() {
    let (code, out, err) = run(&[
        "kv",
        "verify",
        "--degree",
        "4",
        "--trials",
        "3",
        "--tol-factorization",
        "1e-30",
    ]);
    assert_eq!(code, EXIT_CHECK_FAILED);
    assert_eq!(report(&out)["pass"], false);
    assert!(err.contains("FAIL"));
}

#[test]
fn solution_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let sol = dir.path().join("sol.json");
    let (code, _, _) = run(&[
        "kv",
        "solve",
        "--degree",
        "5",
        "--split",
        "symmetric",
        "--out",
        path_arg(&sol),
    ]);
    assert_eq!(code, EXIT_PASS);
    let (code, out, _) = run(&["kv", "verify", "--solution", path_arg(&sol), "--trials", "5"]);
    assert_eq!(code, EXIT_PASS);
    assert_eq!(report(&out)["pass"], true);
}

#[test]
fn certificates_round_trip_and_tampering_is_caught() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.json");
    let cert = dir.path().join("cert.json");
    assert_eq!(
        run(&[
            "instance",
            "square-zero",
            "--dim",
            "4",
            "--trials",
            "3",
            "--out",
            path_arg(&inst)
        ])
        .0,
        EXIT_PASS
    );
    assert_eq!(
        run(&[
            "factor",
            "unipotent",
            "--input",
            path_arg(&inst),
            "--out",
            path_arg(&cert)
        ])
        .0,
        EXIT_PASS
    );
    assert_eq!(run(&["verify", "--cert", path_arg(&cert)]).0, EXIT_PASS);

    let mut r: Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    let target = &mut r["data"]["certificates"][0]["target"]["re"][0][0];
    *target = Value::from(target.as_f64().unwrap() + 0.5);
    std::fs::write(&cert, r.to_string()).unwrap();
    assert_eq!(run(&["verify", "--cert", path_arg(&cert)]).0, EXIT_CHECK_FAILED);
}

#[test]
fn all_factorizations_pass_on_random_instances() {
    for kind in ["unipotent", "comm-n2", "comm-p"] {
        let (code, _, err) = run(&["factor", kind, "--trials", "5", "--dim", "3"]);
        assert_eq!(code, EXIT_PASS, "{kind}: {err}");
    }
    let (code, _, err) = run(&["factor", "exp-comm", "--trials", "2", "--dim", "2", "--steps", "50"]);
    assert_eq!(code, EXIT_PASS, "{err}");
    let (code, _, err) = run(&["dhs-check", "--trials", "6"]);
    assert_eq!(code, EXIT_PASS, "{err}");
}

#[test]
fn acceptance_subset_reports_criterion_lines() {
    let (code, out, err) = run(&["acceptance", "--only", "3,11"]);
    assert_eq!(code, EXIT_PASS, "{err}");
    assert!(err.contains("criterion  3 PASS"));
    assert!(err.contains("criterion 11 PASS"));
    assert!(report(&out)["checks"].as_array().unwrap().len() >= 4);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_kvcert");
    let ok = Command::new(bin).args(["bch", "--degree", "3"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_PASS));
    assert!(report(&String::from_utf8(ok.stdout).unwrap())["pass"]
        .as_bool()
        .unwrap());
    let bad = Command::new(bin).args(["bch", "--split", "diagonal"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_USAGE));
}
