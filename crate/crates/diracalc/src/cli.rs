//! Command-line driver: parse flags, load one or more JSON problem
//! documents, run them, print one verdict line per task, and optionally
//! write the machine-readable reports to a JSON file.

use std::path::PathBuf;

use clap::Parser;

use crate::doc::{run, ProblemDocument, Report};

#[derive(Debug, Parser)]
#[command(
    name = "diracalc",
    about = "Exact calculator and verifier for Dirac structures with polynomial coefficients"
)]
struct Args {
    /// JSON problem documents to run.
    #[arg(required = true)]
    documents: Vec<PathBuf>,

    /// Number of rational probe points for rank and concurrence checks.
    #[arg(long, default_value_t = 12)]
    probes: usize,

    /// Seed for the probe-point generator; reports are byte-identical for
    /// the same seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Write the machine-readable reports (a JSON array) to this path.
    #[arg(long)]
    json: Option<PathBuf>,
}

const EXIT_OK: i32 = 0;
const EXIT_EXPECT_FAIL: i32 = 1;
const EXIT_INPUT_ERROR: i32 = 2;

/// Entry point for the `diracalc` binary; returns the process exit code.
pub fn cli_main() -> i32 {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) => {
            // clap handles --help/--version through this path with status 0.
            let code = if e.use_stderr() { EXIT_INPUT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };

    let mut reports: Vec<Report> = Vec::new();
    let mut any_failed = false;
    for path in &args.documents {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", path.display());
                return EXIT_INPUT_ERROR;
            }
        };
        let doc: ProblemDocument = match serde_json::from_str(&text) {
            Ok(d) => d,
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                return EXIT_INPUT_ERROR;
            }
        };
        let report = match run(&doc, args.probes, args.seed) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                return EXIT_INPUT_ERROR;
            }
        };
        println!("{}:", path.display());
        if let Some(source) = &report.source {
            println!("  source: {source}");
        }
        for task in &report.tasks {
            let name = task
                .name
                .as_ref()
                .map(|n| format!(" -> {n}"))
                .unwrap_or_default();
            println!("  [{}] {}{}: {}", task.index, task.op, name, task.status);
        }
        println!("  {} passed, {} failed", report.passed, report.failed);
        any_failed |= report.failed > 0;
        reports.push(report);
    }

    if let Some(path) = &args.json {
        let body = match serde_json::to_string_pretty(&reports) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("error: cannot serialize report: {e}");
                return EXIT_INPUT_ERROR;
            }
        };
        if let Err(e) = std::fs::write(path, body + "\n") {
            eprintln!("error: cannot write {}: {e}", path.display());
            return EXIT_INPUT_ERROR;
        }
    }

    if any_failed {
        EXIT_EXPECT_FAIL
    } else {
        EXIT_OK
    }
}
