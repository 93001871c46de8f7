//! The acceptance suite: runs every verification criterion at its stated
//! tolerance and prints one pass/fail line per criterion.
//!
//! The same criteria back `framekit verify`; run with `--nocapture` to see
//! the lines on success, or use the binary directly.

use framekit::verify::run_criteria;

#[test]
fn acceptance_criteria() {
    let outcomes = run_criteria(0, None);
    assert_eq!(outcomes.len(), 11, "all criteria must execute");
    let mut failed = Vec::new();
    for outcome in &outcomes {
        println!("{} ({} ms)", outcome.line(), outcome.millis);
        for v in &outcome.verdicts {
            if !v.passed {
                println!("    FAILED: {} -- {}", v.check, v.details);
            }
        }
        if !outcome.passed {
            failed.push(outcome.id);
        }
    }
    assert!(failed.is_empty(), "criteria failed: {failed:?}");
}

#[test]
fn acceptance_subset_by_tag() {
    let outcomes = run_criteria(0, Some("frames"));
    assert_eq!(outcomes.len(), 1);
    assert_eq!(outcomes[0].id, 3);
    assert!(outcomes[0].passed);
}

#[test]
fn acceptance_verdicts_are_seed_independent() {
    // Different seeds draw different mass samples but must reach the same
    // verdicts.
    let a = run_criteria(7, None);
    let b = run_criteria(8, None);
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.id, y.id);
        assert_eq!(x.passed, y.passed, "criterion {} differs across seeds", x.id);
    }
}
