use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use rtlab_cli::{Options, Oracle, Outcome};

#[derive(Parser)]
#[command(
    name = "rtlab",
    version,
    about = "Finite-level pseudocharacter, cohomology and R=T criterion laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Whether to run brute-force oracles.
    #[arg(long, value_enum, default_value = "exhaustive", global = true)]
    oracle: Oracle,
    /// Largest set an exhaustive oracle may enumerate.
    #[arg(long, default_value_t = 1 << 20, global = true)]
    max_order: u64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file.
    Run { file: String },
    /// Run a built-in demo: s3_p3, m2_full, cri1_suite, wl_suite or all.
    Demo { name: String },
    /// Randomized instances: gma, criterion, cohomology or nonsplit.
    Fuzz {
        kind: String,
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = Options {
        oracle: cli.oracle,
        max_order: cli.max_order,
    };
    let start = Instant::now();
    let outcome: Outcome = match &cli.command {
        Command::Run { file } => rtlab_cli::run_file(file, &opts),
        Command::Demo { name } => rtlab_cli::demo(name, &opts),
        Command::Fuzz { kind, count, seed } => rtlab_cli::fuzz(kind, *count, *seed),
    };
    if let Some(m) = &outcome.message {
        eprintln!("error: {m}");
    }
    if let Some(report) = &outcome.report {
        let text = rtlab_cli::render(report);
        let written = match &cli.out {
            Some(path) => std::fs::write(path, text),
            None => std::io::stdout().write_all(text.as_bytes()),
        };
        if let Err(e) = written {
            eprintln!("error: cannot write report: {e}");
            return ExitCode::from(2);
        }
    }
    eprintln!("elapsed: {:.3}s", start.elapsed().as_secs_f64());
    ExitCode::from(outcome.code as u8)
}
