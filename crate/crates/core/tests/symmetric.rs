//! Block-scheme feasibility of symmetric decompositions of an order-12
//! operator with known local block structure.

use odeforge_core::opalgebra::{check_sym_decomposition, BlockScheme, SymMode};

fn target() -> Vec<BlockScheme> {
    vec![
        BlockScheme::parse("0", "2*BL3 + 2*BL1").unwrap(),
        BlockScheme::parse("1/4", "BL3 + 4*BL1").unwrap(),
        BlockScheme::parse("-1/4", "2*BL2 + BL1 + 4*BL0").unwrap(),
    ]
}

fn verdict_at(v: &odeforge_core::opalgebra::SymVerdict, point: &str) -> bool {
    v.points.iter().find(|p| p.point == point).unwrap().not_ruled_out
}

#[test]
fn targets_have_twelve_solutions() {
    assert!(target().iter().all(|t| t.solution_count() == 12));
}

#[test]
fn eleventh_power_is_ruled_out() {
    let v = check_sym_decomposition(&target(), &[2], SymMode::Power(11));
    assert!(!v.not_ruled_out, "{v}");
}

#[test]
fn product_three_four_fails_at_quarter() {
    let v = check_sym_decomposition(&target(), &[3, 4], SymMode::Product);
    assert!(!v.not_ruled_out, "{v}");
    assert!(!verdict_at(&v, "1/4"), "{v}");
}

#[test]
fn product_two_six_fails_only_at_minus_quarter() {
    let v = check_sym_decomposition(&target(), &[2, 6], SymMode::Product);
    assert!(!v.not_ruled_out, "{v}");
    assert!(verdict_at(&v, "1/4"), "{v}");
    assert!(!verdict_at(&v, "-1/4"), "{v}");
}
