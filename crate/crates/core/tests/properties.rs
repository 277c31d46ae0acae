mod common;

#[test]
fn boundary_monotonicity() {
    common::boundary_monotonicity().unwrap();
}

#[test]
fn critical_residual() {
    common::critical_residual().unwrap();
}

#[test]
fn power_law_duality() {
    common::power_law_duality().unwrap();
}

#[test]
fn bracket_containment() {
    common::bracket_containment().unwrap();
}

#[test]
fn single_sign_change() {
    common::single_sign_change().unwrap();
}

#[test]
fn tau_monotonicity() {
    common::tau_monotonicity().unwrap();
}

#[test]
fn bisection_matches_closed_form() {
    common::bisection_matches_closed_form().unwrap();
}

#[test]
fn ratio_invariance() {
    common::ratio_invariance().unwrap();
}

#[test]
fn ratio_at_least_one() {
    common::ratio_at_least_one().unwrap();
}

#[test]
fn bound_sandwich() {
    common::bound_sandwich().unwrap();
}

#[test]
fn line_diameter_monotone() {
    common::line_diameter_monotone().unwrap();
}

#[test]
fn estimator_soundness() {
    common::estimator_soundness().unwrap();
}

#[test]
fn optimizer_never_exceeds() {
    common::optimizer_never_exceeds().unwrap();
}

#[test]
fn packing_rigid_motion() {
    common::packing_rigid_motion().unwrap();
}

#[test]
fn power_law_bridge() {
    common::power_law_bridge().unwrap();
}

#[test]
fn gaussian_identity() {
    common::gaussian_identity().unwrap();
}

#[test]
fn ratio_within_envelope() {
    common::ratio_within_envelope().unwrap();
}

#[test]
fn fpq_scaled_difference() {
    common::fpq_scaled_difference().unwrap();
}

#[test]
fn cli_determinism() {
    common::cli_determinism().unwrap();
}

#[test]
fn cli_round_trip() {
    common::cli_round_trip().unwrap();
}
