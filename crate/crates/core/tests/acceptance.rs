//! Full acceptance battery: one line per criterion, failing if any does.

use ribbonlab::acceptance::run_all;

#[test]
fn acceptance_criteria() {
    let results = run_all();
    let mut failures = 0;
    for r in &results {
        let tag = if r.passed { "PASS" } else { "FAIL" };
        println!("criterion {} ({}): {} — {}", r.index, r.name, tag, r.detail);
        if !r.passed {
            failures += 1;
        }
    }
    assert_eq!(failures, 0, "{failures} acceptance criteria failed");
}
