mod common;

#[test]
fn def3_projection_matches_double_sum() {
    let c = common::criterion_1();
    assert!(c.passed, "{}", c.detail);
}

#[test]
fn twocell_values_and_all_outcome_dominance() {
    let c = common::criterion_2();
    assert!(c.passed, "{}", c.detail);
}

#[test]
fn taxi_fuel_narrative() {
    let c = common::criterion_3();
    assert!(c.passed, "{}", c.detail);
}

#[test]
fn base_matches_exhaustive_enumeration() {
    let c = common::criterion_4();
    assert!(c.passed, "{}", c.detail);
}

#[test]
fn strategy_ordering_on_suite() {
    let c = common::criterion_5();
    assert!(c.passed, "{}", c.detail);
}

#[test]
fn satisfaction_matches_brute_force() {
    let c = common::criterion_6();
    assert!(c.passed, "{}", c.detail);
}
