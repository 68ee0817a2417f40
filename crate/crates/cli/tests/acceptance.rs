//! Acceptance gate: runs every verification suite at its default settings and
//! prints one PASS/FAIL line per criterion. Exits nonzero if any fails.

use std::process::ExitCode;

use sabi_cli::verify::{run_suite, VerifyOptions, SUITES};

fn main() -> ExitCode {
    let mut failures = 0;
    for (i, name) in SUITES.iter().enumerate() {
        match run_suite(name, &VerifyOptions::default()) {
            Ok(checks) => {
                for c in checks {
                    println!("{c}");
                    failures += usize::from(!c.passed);
                }
            }
            Err(e) => {
                println!("FAIL [{}] {name}: {e}", i + 1);
                failures += 1;
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        SUITES.len() - failures,
        SUITES.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
