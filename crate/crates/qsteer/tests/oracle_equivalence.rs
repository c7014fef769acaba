//! Agreement between the first-order steering model and the exact
//! joint-unitary reference at sign-off sample sizes.

use qsteer::checks::{error_order_check, expected_dc_oracle_check, first_order_probability_check};

#[test]
fn expected_cost_change_matches_brute_force_on_500_triples() {
    // 250 cases per register size covers N = 2 and N = 3.
    let check = expected_dc_oracle_check(250, 0x05EE_D001);
    assert!(check.passed, "{}: {}", check.name, check.detail);
}

#[test]
fn branch_update_error_scales_as_dt_squared() {
    let check = error_order_check(20, 0x05EE_D002);
    assert!(check.passed, "{}: {}", check.name, check.detail);
}

#[test]
fn outcome_probabilities_are_fourth_order_accurate() {
    let check = first_order_probability_check(400, 0x05EE_D003);
    assert!(check.passed, "{}: {}", check.name, check.detail);
}
