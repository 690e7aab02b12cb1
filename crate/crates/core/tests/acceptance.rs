//! The acceptance gate as an integration test: one test per check,
//! each printing a pass/fail line (visible with `--nocapture`).

use lu25d::acceptance::{self, CriterionOutcome};

fn report(outcome: CriterionOutcome) {
    let status = if outcome.passed { "PASS" } else { "FAIL" };
    println!(
        "[{status}] {:2}. {} — {}",
        outcome.id, outcome.name, outcome.detail
    );
    assert!(outcome.passed, "{}: {}", outcome.name, outcome.detail);
}

#[test]
fn distributed_runs_factor_correctly() {
    report(acceptance::check_distributed_correctness());
}

#[test]
fn single_processor_matches_reference() {
    report(acceptance::check_oracle_equivalence());
}

#[test]
fn conservation_holds_everywhere() {
    report(acceptance::check_conservation());
}

#[test]
fn panel_traffic_is_confined() {
    report(acceptance::check_confinement());
}

#[test]
fn panel_cost_scales_with_sqrt_p1() {
    report(acceptance::check_panel_scaling());
}

#[test]
fn schur_cost_scales_on_cubes() {
    report(acceptance::check_schur_scaling());
}

#[test]
fn underestimate_factor_grows_with_p() {
    report(acceptance::check_underestimate_grows());
}

#[test]
fn cumulative_closed_form_is_exact() {
    report(acceptance::check_cumulative_closed_form());
}

#[test]
fn lower_bound_exact_and_homogeneous() {
    report(acceptance::check_lower_bound());
}

#[test]
fn regime_flags_consistent() {
    report(acceptance::check_regime_flags());
}
