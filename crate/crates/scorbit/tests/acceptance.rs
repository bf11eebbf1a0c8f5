//! Acceptance gate: one test per criterion, each printing its pass/fail
//! line. Run with `cargo test --test acceptance -- --nocapture` or through
//! `scorbit oracle-check`.

use scorbit::acceptance as acc;

fn check(outcome: acc::CriterionOutcome) {
    println!(
        "[{}] {:<44} {:>8} ms  {}",
        if outcome.passed { "PASS" } else { "FAIL" },
        outcome.name,
        outcome.millis,
        outcome.details
    );
    assert!(outcome.passed, "criterion {} failed: {}", outcome.id, outcome.details);
}

#[test]
fn criterion_1_finite_lemma_exhaustion() {
    check(acc::finite_lemma_exhaustion());
}

#[test]
fn criterion_2_free_orbit_decider() {
    check(acc::free_orbit_decider());
}

#[test]
fn criterion_3_abelian_decider() {
    check(acc::abelian_decider());
}

#[test]
fn criterion_4_dihedral_closed_form() {
    check(acc::dihedral_closed_form());
}

#[test]
fn criterion_5_semi_decider_coherence() {
    check(acc::semi_decider_coherence());
}

#[test]
fn criterion_6_theta_soundness_and_completeness() {
    check(acc::theta_soundness_and_completeness());
}

#[test]
fn criterion_7_dichotomy_probe() {
    check(acc::dichotomy_probe());
}

#[test]
fn criterion_8_determinism_and_golden_files() {
    check(acc::determinism_and_golden_files());
}
