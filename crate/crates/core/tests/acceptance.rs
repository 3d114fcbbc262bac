//! Acceptance criteria: one PASS/FAIL line per criterion on stdout.

use std::io::Write;

use minima_forge::acceptance::{run_acceptance_with, AcceptanceOptions, Fault, Status};

/// Writes past the test harness capture so the verdicts land in the log.
fn show(line: String) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

#[test]
fn acceptance_criteria() {
    let report = run_acceptance_with(&AcceptanceOptions::default(), |r| {
        show(r.line());
        show(format!("    criterion {} took {:.2?} (limit {:?})", r.label, r.elapsed, r.limit));
    });
    assert_eq!(report.results.iter().filter(|r| !r.label.contains('-')).count(), 10);
    let failures: Vec<String> = report.failures().iter().map(|r| r.line()).collect();
    assert!(failures.is_empty(), "failed criteria:\n{}", failures.join("\n"));
}

#[test]
fn injected_faults_are_caught() {
    for (fault, id) in [(Fault::ZeroTemplate, 1), (Fault::Quadrilateral, 2), (Fault::Pulse, 4)] {
        let opts = AcceptanceOptions { fault: Some(fault), only: vec![id], enforce_time: false };
        let report = run_acceptance_with(&opts, |_| {});
        assert_eq!(report.results[0].status, Status::Fail, "{fault:?} not detected");
    }
}
