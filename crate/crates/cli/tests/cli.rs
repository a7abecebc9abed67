use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn rtlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rtlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scenario(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name);
    root.to_str().expect("utf-8 path").to_owned()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json report")
}

#[test]
fn zero_count_is_a_usage_error() {
    let out = rtlab(&["fuzz", "gma", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("at least 1"));
}

#[test]
fn unknown_names_are_usage_errors() {
    assert_eq!(rtlab(&["fuzz", "bogus", "3"]).status.code(), Some(2));
    assert_eq!(rtlab(&["demo", "bogus"]).status.code(), Some(2));
    assert_eq!(rtlab(&["run", "/nonexistent.toml"]).status.code(), Some(2));
}

#[test]
fn malformed_scenario_reports_line() {
    let out = rtlab(&["run", &scenario("malformed.toml")]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 5"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn planted_hypothesis_violation_exits_zero() {
    let out = rtlab(&["run", &scenario("criterion_planted_h2.toml")]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["status"], "ok");
    assert_eq!(
        r["results"]["criterion"]["outcome"]["status"],
        "hypothesis_failure"
    );
    assert_eq!(
        r["results"]["criterion"]["outcome"]["failed"][0],
        "H2: R/piR is O-cyclic of positive length"
    );
}

#[test]
fn failed_expectation_exits_one() {
    let text = std::fs::read_to_string(scenario("s3_sign_cohomology.toml"))
        .unwrap()
        .replace("\"h1.log_order\" = 1", "\"h1.log_order\" = 2");
    let path = std::env::temp_dir().join(format!("rtlab-expect-{}.toml", std::process::id()));
    std::fs::write(&path, text).unwrap();
    let out = rtlab(&["run", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["status"], "invariant_failure");
}

#[test]
fn every_scenario_runs() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| e.ok()?.file_name().into_string().ok())
        .filter(|n| n.ends_with(".toml") && n != "malformed.toml")
        .collect();
    names.sort();
    assert!(names.len() >= 6);
    for n in names {
        let out = rtlab(&["run", &scenario(&n)]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{n}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn sign_cohomology_values() {
    let r = report(&rtlab(&["run", &scenario("s3_sign_cohomology.toml")]));
    assert_eq!(r["results"]["h1"]["log_order"], 1);
    assert_eq!(r["results"]["h1_exhaustive"]["log_order"], 1);
}

#[test]
fn fast_oracle_skips_enumeration() {
    let r = report(&rtlab(&[
        "--oracle",
        "fast",
        "run",
        &scenario("s3_sign_cohomology.toml"),
    ]));
    assert!(r["results"].get("h1_exhaustive").is_none());
}

#[test]
fn out_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("rtlab-out-{}.json", std::process::id()));
    let out = rtlab(&[
        "--out",
        path.to_str().unwrap(),
        "fuzz",
        "criterion",
        "20",
        "--seed",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let written = std::fs::read(&path).unwrap();
    std::fs::remove_file(&path).ok();
    let again = rtlab(&["fuzz", "criterion", "20", "--seed", "5"]);
    assert_eq!(written, again.stdout);
}

#[test]
fn library_entry_points_agree_with_binary() {
    let opts = rtlab_cli::Options::default();
    let lib = rtlab_cli::demo("cri1_suite", &opts);
    assert_eq!(lib.code, 0);
    let bin = rtlab(&["demo", "cri1_suite"]);
    assert_eq!(
        rtlab_cli::render(lib.report.as_ref().unwrap()).as_bytes(),
        &bin.stdout[..]
    );
    assert_eq!(rtlab_cli::fuzz("gma", 0, 1).code, 2);
    assert_eq!(
        rtlab_cli::run_text("kind = \"gma\"\nbogus = 1\n", &opts).code,
        2
    );
}
