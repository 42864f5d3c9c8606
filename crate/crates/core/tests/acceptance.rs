//! One pass/fail line per acceptance criterion, then a single assertion over
//! the whole table so every line is printed before the test fails.

use std::io::Write;

use racenav::acceptance::run_all;

#[test]
fn acceptance_suite() {
    let reports = run_all();
    let failed: Vec<usize> = reports.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    // Written to the raw handle so the table shows even when output is captured.
    let mut err = std::io::stderr().lock();
    writeln!(err).unwrap();
    for r in &reports {
        writeln!(err, "{}", r.line()).unwrap();
    }
    writeln!(err, "{}/{} criteria passed", reports.len() - failed.len(), reports.len()).unwrap();
    drop(err);
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
