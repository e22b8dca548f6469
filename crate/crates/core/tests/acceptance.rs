//! One line per acceptance criterion. Runs in release-level optimization
//! through the test profile.

use krein::suite::{run_suite, SuiteConfig};

/// Criteria that fail at their pinned thresholds for reasons recorded
/// with the project; they are still run and reported as FAIL.
const KNOWN_FAILING: [&str; 1] = ["ol-growth"];

fn main() {
    let outcomes = run_suite(&SuiteConfig::default(), |o| println!("{}", o.line())).expect("acceptance battery errored");
    let unexpected: Vec<&str> = outcomes
        .iter()
        .filter(|o| !o.passed && !KNOWN_FAILING.contains(&o.id))
        .map(|o| o.id)
        .collect();
    let passed = outcomes.iter().filter(|o| o.passed).count();
    println!("acceptance: {passed}/{} criteria passed", outcomes.len());
    for id in KNOWN_FAILING {
        if let Some(o) = outcomes.iter().find(|o| o.id == id && !o.passed) {
            println!("known failure: {} ({})", o.id, o.description);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {}", unexpected.join(", "));
        std::process::exit(1);
    }
}
