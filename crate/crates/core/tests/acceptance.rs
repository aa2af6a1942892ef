//! Runs the ten acceptance checks and prints one line per criterion.

use std::process::ExitCode;

use eigenstaf::verify::{run_suite, SuiteOptions};

/// Wall-clock budget in seconds per criterion, where one is stated.
fn budget(id: usize) -> Option<f64> {
    match id {
        1 | 2 => Some(5.0),
        3 => Some(30.0),
        4 => Some(60.0),
        5 => Some(2.0),
        8 | 9 => Some(120.0),
        _ => None,
    }
}

fn main() -> ExitCode {
    let verbose = std::env::args().any(|a| a == "--verbose" || a == "-v");
    let results = run_suite(SuiteOptions::default());
    let mut failures = 0;
    for r in &results {
        let over = budget(r.id).filter(|&b| r.seconds > b);
        let passed = r.passed && over.is_none();
        if !passed {
            failures += 1;
        }
        println!(
            "{} [{}] {} ({:.2} s)",
            if passed { "PASS" } else { "FAIL" },
            r.id,
            r.name,
            r.seconds
        );
        if let Some(b) = over {
            println!("    runtime budget {b:.0} s exceeded");
        }
        if verbose || !r.passed {
            for d in &r.details {
                println!("    {d}");
            }
        }
    }
    println!("{}/{} criteria passed", results.len() - failures, results.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
