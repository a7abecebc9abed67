//! Scenario runner, built-in demos and fuzzers on top of `rtlab`.
//!
//! Reports are JSON documents with sorted keys; the same input and seed
//! always give byte-identical output.

pub mod demos;
pub mod fuzz;
pub mod runner;
pub mod scenario;

use serde_json::{json, Value};

pub use demos::DemoError;
pub use fuzz::FuzzError;
pub use scenario::ScenarioError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Oracle {
    /// Run brute-force oracles next to the linear-algebra paths.
    Exhaustive,
    /// Linear-algebra paths only.
    Fast,
}

#[derive(Clone, Copy, Debug)]
pub struct Options {
    pub oracle: Oracle,
    /// Largest set an exhaustive oracle may enumerate.
    pub max_order: u64,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            oracle: Oracle::Exhaustive,
            max_order: 1 << 20,
        }
    }
}

impl Options {
    pub fn exhaustive(&self) -> bool {
        self.oracle == Oracle::Exhaustive
    }
}

/// Exit code and report of one invocation.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub code: i32,
    pub report: Option<Value>,
    pub message: Option<String>,
}

impl Outcome {
    fn from_report(report: Value) -> Outcome {
        let code = if report["status"] == "ok" { 0 } else { 1 };
        Outcome {
            code,
            report: Some(report),
            message: None,
        }
    }

    fn usage(message: String) -> Outcome {
        Outcome {
            code: 2,
            report: None,
            message: Some(message),
        }
    }
}

pub fn run_text(text: &str, opts: &Options) -> Outcome {
    match scenario::parse(text).and_then(|sc| runner::run_scenario(&sc, opts)) {
        Ok(r) => Outcome::from_report(r),
        Err(e) => Outcome::usage(e.to_string()),
    }
}

pub fn run_file(path: &str, opts: &Options) -> Outcome {
    match scenario::load(path).and_then(|sc| runner::run_scenario(&sc, opts)) {
        Ok(r) => Outcome::from_report(r),
        Err(e) => Outcome::usage(format!("{path}: {e}")),
    }
}

pub fn demo(name: &str, opts: &Options) -> Outcome {
    match demos::demo_section(name, opts) {
        Ok(s) => Outcome::from_report(s.into_report(json!({ "kind": "demo", "name": name }))),
        Err(e) => Outcome::usage(e.to_string()),
    }
}

pub fn fuzz(kind: &str, count: usize, seed: u64) -> Outcome {
    match fuzz::fuzz_section(kind, count, seed) {
        Ok(s) => Outcome::from_report(s.into_report(json!({ "kind": "fuzz", "name": kind }))),
        Err(e) => Outcome::usage(e.to_string()),
    }
}

/// Pretty JSON with a trailing newline.
pub fn render(report: &Value) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("serializable");
    s.push('\n');
    s
}
