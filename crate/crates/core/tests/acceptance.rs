//! Runs the ten acceptance criteria and prints one line per criterion.
//! Exits nonzero when any of them fails.

use std::process::ExitCode;
use std::time::Instant;

use tritter_core::verify::{run_check, CHECKS};

fn main() -> ExitCode {
    println!("\nacceptance criteria");
    let mut failed = 0;
    for (id, ..) in CHECKS {
        let start = Instant::now();
        let outcome = run_check(id).expect("listed check exists");
        println!(
            "  criterion {:>2} {:<36} {} ({:.2}s) {}",
            outcome.id,
            outcome.name,
            if outcome.passed { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            outcome.detail
        );
        if !outcome.passed {
            failed += 1;
        }
    }
    println!("{} passed, {failed} failed\n", CHECKS.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
