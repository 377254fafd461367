//! One line per acceptance criterion, then the informational notes.

use dbr_core::suite::{run_check, run_suite};

#[test]
fn acceptance() {
    let report = run_suite();
    println!();
    for c in &report.checks {
        println!("{}", c.line());
    }
    for n in &report.notes {
        println!("[INFO] {}: {}", n.name, n.detail);
    }
    let failed: Vec<_> = report
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.id)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn checks_are_reproducible() {
    let a = run_check(8).unwrap();
    let b = run_check(8).unwrap();
    assert_eq!(a.worst, b.worst);
    assert!(run_check(11).is_none());
}
