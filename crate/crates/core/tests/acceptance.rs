//! Acceptance suite: prints one PASS/FAIL line per criterion and fails the
//! run if any criterion fails.

use rayon::prelude::*;
use sgdelta::validation::{run_criterion, CRITERIA};

fn main() {
    let results: Vec<_> = (1..=CRITERIA.len())
        .into_par_iter()
        .map(run_criterion)
        .collect();
    let mut failed = 0;
    for r in &results {
        println!("{}", r.summary_line());
        if let Some(e) = &r.error {
            println!("       error: {e}");
        }
        for c in r.checks.iter().filter(|c| !c.passed) {
            println!("       {}: {} (target {})", c.label, c.value, c.target);
        }
        if !r.passed {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} passed, {} failed",
        results.len() - failed,
        failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
