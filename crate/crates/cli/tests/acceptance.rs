//! One test per acceptance criterion. Each prints a PASS/FAIL line; run with
//! `cargo test -p iqht-cli --test acceptance -- --nocapture --test-threads 1`.
//!
//! Two sub-checks are red on purpose and pinned here so that a change in
//! either direction is noticed:
//! - criterion 5 `sigma_quote`: 2/π = 0.636620 sits 8.0e-5 from the quoted
//!   0.6367, outside the 5e-5 band;
//! - criterion 9 `tree_refinement`: the five-point scheme is exact for the
//!   cycle-integrated problem, so both grids sit at the roundoff floor and
//!   the error does not decrease.

use iqht_cli::acceptance::{run, Criterion};

fn check(id: u8, known_red: &[&str]) -> Criterion {
    let c = run(id);
    println!("{}", c.line());
    for s in &c.checks {
        println!("    {:<28} {} value={} target={} tol={}", s.name, if s.pass { "ok " } else { "RED" }, s.value, s.target, s.tolerance);
    }
    assert_eq!(c.failed_checks(), known_red, "criterion {id}");
    c
}

#[test]
fn criterion_01_beta_functions() {
    let c = check(1, &[]);
    assert!(c.elapsed.as_secs_f64() < 5.0);
}

#[test]
fn criterion_02_intermediate_coefficients() {
    check(2, &[]);
}

#[test]
fn criterion_03_scaling_dimensions() {
    check(3, &[]);
}

#[test]
fn criterion_04_poisson_duality() {
    let c = check(4, &[]);
    assert!(c.elapsed.as_secs_f64() < 1.0);
}

#[test]
fn criterion_05_ohmic_limit_and_sigma() {
    let c = check(5, &["sigma_quote"]);
    let quote = c.checks.iter().find(|s| s.name == "sigma_quote").unwrap();
    let gap = (quote.value.as_f64().unwrap() - 0.6367).abs();
    assert!((7.9e-5..8.1e-5).contains(&gap), "{gap}");
}

#[test]
fn criterion_06_square_geometry() {
    check(6, &[]);
}

#[test]
fn criterion_07_integrator() {
    check(7, &[]);
}

#[test]
fn criterion_08_stability() {
    check(8, &[]);
}

#[test]
fn criterion_09_cylinder() {
    let c = check(9, &["tree_refinement"]);
    assert!(c.elapsed.as_secs_f64() < 30.0);
    // both errors at roundoff: the refinement check fails on noise, not on
    // discretization error
    let tree = iqht_cli::acceptance::tree_error;
    assert!(tree(64).unwrap() < 1e-11 && tree(128).unwrap() < 1e-11);
}

#[test]
fn criterion_10_kt_criticality() {
    check(10, &[]);
}
