//! The acceptance suite: one pass/fail line per criterion, all required to
//! pass. Run with `cargo test -p carlitz-core --test acceptance -- --nocapture`
//! to see the per-criterion lines.

use carlitz_core::suite::run_suite;

#[test]
fn acceptance_criteria() {
    let outcome = run_suite(false);
    for r in &outcome.results {
        println!(
            "{} {}: {} ({} cases)",
            if r.passed { "PASS" } else { "FAIL" },
            r.id,
            r.name,
            r.cases
        );
        for f in r.failures.iter().take(8) {
            println!("      failed case: {}", f);
        }
    }
    let failed: Vec<&str> = outcome.results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    assert!(failed.is_empty(), "failing criteria: {:?}", failed);
}

#[test]
fn battery_is_deterministic() {
    let a = serde_json::to_string(&run_suite(true).to_json()).unwrap();
    let b = serde_json::to_string(&run_suite(true).to_json()).unwrap();
    assert_eq!(a, b);
}
