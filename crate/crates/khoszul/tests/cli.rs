//! Black-box tests of the command-line binary: output shapes, exit
//! codes, and determinism.

use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_khoszul"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_json(args: &[&str]) -> (Output, Value) {
    let out = run(args);
    let json: Value = serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {:?}", String::from_utf8_lossy(&out.stdout)));
    (out, json)
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn check_envelope(json: &Value, command: &str) {
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["command"], command);
    assert!(json["input"].is_object());
    assert!(!json["results"].is_null());
}

#[test]
fn kh_integral_unlink_two() {
    let (out, json) = run_json(&["kh", "--link", "unlink:2", "--coeff", "Z", "--quiet", "--no-timings"]);
    assert_eq!(exit_code(&out), 0);
    check_envelope(&json, "kh");
    assert_eq!(json["results"]["total_free_rank"], 4);
    assert_eq!(json["results"]["torsion_divisors"].as_array().unwrap().len(), 0);
    assert!(out.stderr.is_empty(), "--quiet must suppress the table");
}

#[test]
fn kh_rational_hopf() {
    let (out, json) = run_json(&["kh", "--link", "hopf", "--coeff", "Q", "--no-timings"]);
    assert_eq!(exit_code(&out), 0);
    assert_eq!(json["results"]["total_dim"], 4);
    assert!(!out.stderr.is_empty(), "table goes to stderr by default");
}

#[test]
fn kh_braid_closure_trefoil_reports_torsion() {
    let (out, json) = run_json(&[
        "kh", "--braid", "s1 s1 s1", "--strands", "2", "--coeff", "Z", "--quiet", "--no-timings",
    ]);
    assert_eq!(exit_code(&out), 0);
    assert_eq!(json["results"]["total_free_rank"], 4);
    assert_eq!(json["results"]["torsion_divisors"], serde_json::json!(["2"]));
}

#[test]
fn pointed_unknot_variants() {
    let (out, json) = run_json(&[
        "pointed", "--link", "unknot", "--points", "1:0", "--variant", "doubled", "--coeff", "Z",
        "--quiet", "--no-timings",
    ]);
    assert_eq!(exit_code(&out), 0);
    check_envelope(&json, "pointed");
    assert_eq!(json["results"]["total_free_rank"], 2);
    assert_eq!(json["results"]["torsion_divisors"], serde_json::json!(["2"]));

    let (_, json) = run_json(&[
        "pointed", "--link", "unknot", "--points", "1:0", "--variant", "standard", "--coeff", "Z",
        "--quiet", "--no-timings",
    ]);
    assert_eq!(json["results"]["total_free_rank"], 2);
    assert_eq!(json["results"]["torsion_divisors"].as_array().unwrap().len(), 0);

    let (_, json) = run_json(&[
        "pointed", "--link", "unknot", "--points", "1:0", "--variant", "doubled", "--coeff", "F3",
        "--quiet", "--no-timings",
    ]);
    assert_eq!(json["results"]["total_dim"], 2);
}

#[test]
fn koszul_totals() {
    for (args, want) in [
        (vec!["koszul", "--link", "unlink:3", "--points", "one-per-component"], 8),
        (vec!["koszul", "--link", "hopf", "--points", "one-per-component"], 8),
        (vec!["koszul", "--link", "unknot", "--points", "1:0"], 2),
    ] {
        let mut args = args.clone();
        args.extend(["--quiet", "--no-timings"]);
        let (out, json) = run_json(&args);
        assert_eq!(exit_code(&out), 0);
        assert_eq!(json["results"]["total_z_rank"], want, "{:?}", args);
        for entry in json["results"]["exterior"].as_array().unwrap() {
            assert_eq!(entry["group"]["torsion"].as_array().unwrap().len(), 0, "{:?}", args);
        }
    }
}

#[test]
fn ss_unknot_collapses_at_the_second_page() {
    let (out, json) = run_json(&[
        "ss", "--link", "unknot", "--points", "1:0", "--coeff", "Q", "--quiet", "--no-timings",
    ]);
    assert_eq!(exit_code(&out), 0);
    check_envelope(&json, "ss");
    assert_eq!(json["results"]["convergence"]["ok"], true);
    let pages = json["results"]["pages"].as_array().unwrap();
    let total = |p: &Value| -> u64 {
        p["entries"].as_array().unwrap().iter().map(|e| e["dim"].as_u64().unwrap()).sum()
    };
    assert_eq!(total(&pages[0]), 4, "first page");
    assert_eq!(total(pages.last().unwrap()), 2, "final page");
    assert_eq!(pages.last().unwrap()["final"], true);
}

#[test]
fn ss_rejects_integer_coefficients() {
    let out = run(&["ss", "--link", "unknot", "--points", "1:0", "--coeff", "Z"]);
    assert_eq!(exit_code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("field"));
}

#[test]
fn verify_is_sharp_on_catalog_values() {
    for link in ["unknot", "unlink:2", "hopf"] {
        let (out, json) = run_json(&["verify", "--link", link, "--quiet", "--no-timings"]);
        assert_eq!(exit_code(&out), 0, "{link}");
        check_envelope(&json, "verify");
        assert_eq!(json["results"]["unreduced"]["verdict"], "sharp", "{link}");
        assert_eq!(json["results"]["reduced"]["verdict"], "sharp", "{link}");
        assert_eq!(json["results"]["unreduced"]["slack"], 0, "{link}");
    }
}

#[test]
fn verify_without_catalog_dimension_is_unknown() {
    let (out, json) = run_json(&["verify", "--link", "trefoil", "--quiet", "--no-timings"]);
    assert_eq!(exit_code(&out), 0);
    assert_eq!(json["results"]["unreduced"]["verdict"], "unknown");
    assert_eq!(json["results"]["reduced"]["verdict"], "unknown");
}

#[test]
fn verify_override_can_flag_a_violation() {
    let (out, json) = run_json(&[
        "verify", "--link", "trefoil", "--khi-dim", "1000", "--quiet", "--no-timings",
    ]);
    assert_eq!(exit_code(&out), 1);
    assert_eq!(json["results"]["unreduced"]["verdict"], "violated");
}

#[test]
fn input_errors_exit_two() {
    for args in [
        vec!["verify", "--link", "no-such-link"],
        vec!["kh", "--pd", "X[1,2,3]"],
        vec!["kh", "--pd", "X[1,3,2,4] X[3,1,4,2]", "--link", "hopf"],
        vec!["kh", "--braid", "s1"],
        vec!["kh", "--link", "unknot", "--coeff", "F4"],
        vec!["koszul", "--link", "unknot", "--points", ""],
        vec!["kh", "--link", "unknot", "--reduced"],
    ] {
        let out = run(&args);
        assert_eq!(exit_code(&out), 2, "{:?}: {}", args, String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn reports_are_deterministic_without_timings() {
    let args = ["koszul", "--link", "hopf", "--points", "one-per-component", "--quiet", "--no-timings"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(exit_code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let json: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert!(json.get("timings_ms").map_or(true, |t| t.is_null()), "--no-timings omits timings");

    let (_, with_timings) = run_json(&["koszul", "--link", "hopf", "--points", "one-per-component", "--quiet"]);
    assert!(with_timings["timings_ms"].is_object());
}

#[test]
fn invalid_thread_cap_warns_but_runs() {
    let out = Command::new(env!("CARGO_BIN_EXE_khoszul"))
        .args(["kh", "--link", "unknot", "--quiet", "--no-timings"])
        .env("KHOSZUL_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("KHOSZUL_THREADS"));
}
