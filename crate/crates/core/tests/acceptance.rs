//! Acceptance suite: one test per criterion, each printing its check
//! lines (`name measured bound PASS|FAIL`) and asserting they all pass.
//! Run with `cargo test -p ksurf --test acceptance -- --nocapture` to
//! see the lines.

use ksurf::verify::{self, CheckLine};

fn assert_all(lines: Vec<CheckLine>) {
    for line in &lines {
        println!("{line}");
    }
    let failed: Vec<String> = lines
        .iter()
        .filter(|l| !l.pass)
        .map(|l| l.to_string())
        .collect();
    assert!(failed.is_empty(), "failed checks:\n{}", failed.join("\n"));
}

#[test]
fn criterion_01_riccati_closed_forms() {
    assert_all(verify::riccati_closed_forms());
}

#[test]
fn criterion_02_curvature_bound_domination() {
    assert_all(verify::curvature_bound_domination());
}

#[test]
fn criterion_03_phi_derivative_identity() {
    assert_all(verify::phi_derivative_identity());
}

#[test]
fn criterion_04_discrete_geometry_oracle() {
    assert_all(verify::discrete_geometry_oracle());
}

#[test]
fn criterion_05_gauss_equation_cross_check() {
    assert_all(verify::gauss_equation_cross_check());
}

#[test]
fn criterion_06_trace_identity() {
    assert_all(verify::trace_identity());
}

#[test]
fn criterion_07_homogeneous_elliptic_solve() {
    assert_all(verify::homogeneous_elliptic_solve());
}

#[test]
fn criterion_08_determinant_law() {
    assert_all(verify::determinant_law(1e-2));
}

#[test]
fn criterion_09_continuation_vs_exact_family() {
    assert_all(verify::continuation_vs_exact(1e-2));
}

#[test]
fn criterion_10_perturbation_robustness_and_nesting() {
    assert_all(verify::perturbation_robustness(1e-2));
}

#[test]
fn criterion_11_wedge_weak_bound() {
    assert_all(verify::wedge_weak_bound());
}

#[test]
fn criterion_12_convergence_sweep_proxies() {
    assert_all(verify::convergence_sweep_proxies());
}

#[test]
fn criterion_13_volume_closed_form() {
    assert_all(verify::volume_closed_form());
}
