//! One line per acceptance criterion. Exits non-zero if any criterion fails.
//!
//! Run a subset with `cargo test --test acceptance -- 2 5`.

use std::process::ExitCode;

use limbsys_core::acceptance;

fn main() -> ExitCode {
    let ids: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let results: Vec<_> = if ids.is_empty() {
        acceptance::run_all()
    } else {
        ids.into_iter().filter_map(acceptance::run).collect()
    };
    let mut failed = 0;
    for r in &results {
        println!("{r}");
        failed += usize::from(!r.passed);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
