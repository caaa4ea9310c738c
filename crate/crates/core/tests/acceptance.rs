//! Acceptance criteria, one line per criterion. Runs without the libtest
//! harness so the lines are always shown.

use std::process::ExitCode;

use qunion::harness::criteria::run_all;

fn main() -> ExitCode {
    let results = run_all(42);
    for r in &results {
        println!("{r}");
    }
    let failed = results.iter().filter(|r| !r.pass).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
