//! `cargo test --test acceptance` runs all criteria; `-- 2 5` runs a subset.

use std::io::Write;
use std::process::ExitCode;

use nctrace_cli::acceptance::{format_line, run_one, CRITERIA};

fn main() -> ExitCode {
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let mut failed = Vec::new();
    let mut ran = 0;
    for &(id, name, check) in CRITERIA.iter().filter(|c| only.is_empty() || only.contains(&c.0)) {
        let r = run_one(id, name, check);
        let _ = writeln!(out, "{}", format_line(&r));
        let _ = out.flush();
        ran += 1;
        if !r.passed {
            failed.push(id);
        }
    }
    let _ = writeln!(out, "acceptance: {} passed, {} failed", ran - failed.len(), failed.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        let _ = writeln!(out, "failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
