//! Acceptance gate: runs every criterion of the property suite and prints
//! one verdict line per criterion. Run with `--nocapture` to see the lines
//! even when everything passes.

use lipfree::suite::{run_suite, RunConfig};

#[test]
fn acceptance() {
    let config = RunConfig::default();
    let report = run_suite(&config);
    for c in &report.criteria {
        let verdict = if c.passed { "pass" } else { "FAIL" };
        println!("criterion {:>2} {:<22} {}  {}", c.id, c.name, verdict, c.detail);
    }
    assert_eq!(report.criteria.len(), 11);
    assert!(
        report.all_passed,
        "{} criterion(s) failed",
        report.criteria.iter().filter(|c| !c.passed).count()
    );
}
