//! Property suites at 1000+ cases from a fixed seed.

mod props;

#[test]
fn parse_unparse_is_the_identity() {
    props::parse_unparse(1500).unwrap();
}

#[test]
fn checked_programs_evaluate_without_shape_errors() {
    props::soundness(1000).unwrap();
}

#[test]
fn product_checks_iff_inner_dims_agree() {
    props::ab_compat(1000).unwrap();
}

#[test]
fn sum_bodies_never_hold_top_level_addition() {
    props::sum_bodies(1000).unwrap();
}

#[test]
fn sparse_programs_agree_with_dense() {
    props::sparse_dense(1000).unwrap();
}

#[test]
fn transpose_is_an_involution() {
    props::transpose_involution(1000).unwrap();
}

#[test]
fn mangling_is_injective() {
    props::mangling(1000).unwrap();
}
