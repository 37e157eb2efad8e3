//! Acceptance suite: one PASS/FAIL line per criterion at the pinned
//! tolerances, then a determinism rerun of every config.
//!
//! Runs without the libtest harness so the lines reach stdout.
//! A criterion listed in `KNOWN_DIVERGENCES` is reported as FAIL like any
//! other, but does not abort the test binary; the reason is printed next to it.
//! Any other failure, or a known divergence that starts passing, exits non-zero.

use std::process::ExitCode;
use std::time::Instant;

use fraclab_core::harness::{acceptance_suite, configure_threads, run_criterion, Report};

/// Criteria whose pinned check contradicts the theory as implemented.
const KNOWN_DIVERGENCES: &[(u32, &str)] = &[(
    8,
    "local time in x is Hölder of order (1−H)/(2H), so its finite-variation index is \
     2H/(1−H) = 6 at H = 0.75; p = 1.8 sums grow under refinement instead of decaying",
)];

fn main() -> ExitCode {
    configure_threads().expect("thread pool");
    let suite = acceptance_suite();
    let mut unexpected = Vec::new();
    let mut all_reports: Vec<(u32, Vec<Report>)> = Vec::new();
    for criterion in &suite {
        let start = Instant::now();
        let reports = match run_criterion(criterion) {
            Ok(r) => r,
            Err(e) => {
                println!("criterion {}: FAIL {} (error: {e})", criterion.number, criterion.title);
                unexpected.push(criterion.number);
                continue;
            }
        };
        let pass = reports.iter().all(Report::pass);
        let known = KNOWN_DIVERGENCES.iter().find(|(n, _)| *n == criterion.number);
        println!(
            "criterion {}: {} {} ({:.1} s)",
            criterion.number,
            if pass { "PASS" } else { "FAIL" },
            criterion.title,
            start.elapsed().as_secs_f64()
        );
        for r in &reports {
            print!("{}", r.summary());
        }
        match (pass, known) {
            (true, None) => {}
            (false, Some((_, why))) => println!("  known divergence: {why}"),
            (true, Some(_)) => {
                println!("  listed as a known divergence but passed; update the list");
                unexpected.push(criterion.number);
            }
            (false, None) => unexpected.push(criterion.number),
        }
        all_reports.push((criterion.number, reports));
    }

    let start = Instant::now();
    let mut mismatched = Vec::new();
    for (number, reports) in &all_reports {
        for r in reports {
            let again = fraclab_core::harness::run_experiment(&r.config).expect("rerun");
            if again.csv_bytes().expect("csv") != r.csv_bytes().expect("csv") {
                mismatched.push(format!("{number}:{}", r.config.stem()));
            }
        }
    }
    let determinism = mismatched.is_empty() && all_reports.len() == suite.len();
    println!(
        "criterion 15: {} determinism ({:.1} s){}",
        if determinism { "PASS" } else { "FAIL" },
        start.elapsed().as_secs_f64(),
        if mismatched.is_empty() {
            String::new()
        } else {
            format!(" mismatched: {}", mismatched.join(", "))
        }
    );
    if !determinism {
        unexpected.push(15);
    }

    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {unexpected:?}");
        ExitCode::FAILURE
    }
}
