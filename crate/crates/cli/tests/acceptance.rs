//! Acceptance gate: one test per criterion, each printing a single
//! pass/fail line (run with `--nocapture` to see all lines together, or use
//! the `deficit verify` subcommand).

use deficit_cli::verify::criterion;

const SEED: u64 = 17;

fn check(index: usize) {
    let outcome = criterion(index, SEED);
    println!("{}", outcome.line());
    assert!(outcome.passed, "{}", outcome.line());
}

#[test]
fn criterion_01_equality_cases() {
    check(1);
}

#[test]
fn criterion_02_conformal_invariance() {
    check(2);
}

#[test]
fn criterion_03_degree_identification() {
    check(3);
}

#[test]
fn criterion_04_kernel_and_taylor_order() {
    check(4);
}

#[test]
fn criterion_05_coercivity_spectrum() {
    check(5);
}

#[test]
fn criterion_06_volume_expansion() {
    check(6);
}

#[test]
fn criterion_07_stability_ratio() {
    check(7);
}

#[test]
fn criterion_08_bubble_normalization() {
    check(8);
}

#[test]
fn criterion_09_renormalized_quadratic_limit() {
    check(9);
}

#[test]
fn criterion_10_residual_decay_and_flow() {
    check(10);
}
