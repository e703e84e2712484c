use lcgqr::problem::check_loss;
use lcgqr::prox::{prox_check_scalar, prox_penalty, prox_penalty_scalar, soft_threshold};
use lcgqr::PenaltySpec;
use nalgebra::dvector;
use proptest::prelude::*;

/// Smallest value of `f` on a grid of step 1e-3 over [center − 5, center + 5].
fn grid_min(center: f64, f: impl Fn(f64) -> f64) -> f64 {
    (0..=10_000).map(|k| f(center - 5.0 + 1e-3 * k as f64)).fold(f64::INFINITY, f64::min)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn check_prox_beats_grid(v in -3.0..3.0f64, tau in 0.05..0.95f64, gamma in 0.3..5.0f64) {
        let obj = |z: f64| check_loss(z, tau) + gamma / 2.0 * (v - z).powi(2);
        let z = prox_check_scalar(v, tau, gamma);
        prop_assert!(obj(z) <= grid_min(v, obj) + 1e-9);
    }

    #[test]
    fn check_prox_nonexpansive(a in -4.0..4.0f64, b in -4.0..4.0f64, tau in 0.05..0.95f64, gamma in 0.3..5.0f64) {
        let d = (prox_check_scalar(a, tau, gamma) - prox_check_scalar(b, tau, gamma)).abs();
        prop_assert!(d <= (a - b).abs() + 1e-12);
    }

    #[test]
    fn soft_threshold_nonexpansive(a in -4.0..4.0f64, b in -4.0..4.0f64, k in 0.0..2.0f64) {
        prop_assert!((soft_threshold(a, k) - soft_threshold(b, k)).abs() <= (a - b).abs() + 1e-12);
    }

    #[test]
    fn scad_prox_beats_grid(delta in -4.0..4.0f64, lam in 0.1..1.5f64, gamma in 0.5..4.0f64, extra in 0.01..3.0f64) {
        let xi = (1.0 / gamma + 1.0).max(2.0) + extra;
        let pen = PenaltySpec::scad(lam, xi).unwrap();
        let obj = |z: f64| pen.value(z) + gamma / 2.0 * (delta - z).powi(2);
        let z = prox_penalty_scalar(delta, &pen, gamma);
        prop_assert!(obj(z) <= grid_min(delta, obj) + 1e-9);
    }

    #[test]
    fn mcp_prox_beats_grid(delta in -4.0..4.0f64, lam in 0.1..1.5f64, gamma in 0.5..4.0f64, extra in 0.01..3.0f64) {
        let xi = 1.0 / gamma + extra;
        let pen = PenaltySpec::mcp(lam, xi).unwrap();
        let obj = |z: f64| pen.value(z) + gamma / 2.0 * (delta - z).powi(2);
        let z = prox_penalty_scalar(delta, &pen, gamma);
        prop_assert!(obj(z) <= grid_min(delta, obj) + 1e-9);
    }
}

#[test]
fn scad_middle_region_is_stationary() {
    // λ = 1, ξ = 3.7, γ = 1: the middle region is (2, 3.7].
    let pen = PenaltySpec::scad(1.0, 3.7).unwrap();
    let delta = 3.0;
    let z = prox_penalty_scalar(delta, &pen, 1.0);
    let slope = (3.7 - z) / 2.7;
    assert!((slope + (z - delta)).abs() < 1e-12, "z = {z}");
    assert!(z > 2.0 && z < 3.0);
}

#[test]
fn mcp_middle_region_is_stationary() {
    // λ = 1, ξ = 3, γ = 1: |δ| ≤ ξλ shrinks, the derivative is λ − z/ξ.
    let pen = PenaltySpec::mcp(1.0, 3.0).unwrap();
    let delta = 2.0;
    let z = prox_penalty_scalar(delta, &pen, 1.0);
    assert!((1.0 - z / 3.0 + (z - delta)).abs() < 1e-12, "z = {z}");
    assert!((z - 1.5).abs() < 1e-12);
}

#[test]
fn weak_concavity_is_rejected() {
    let scad = PenaltySpec::scad(1.0, 1.5).unwrap();
    assert!(prox_penalty(&dvector![1.0], &scad, 1.0).is_err());
    let mcp = PenaltySpec::mcp(1.0, 0.5).unwrap();
    assert!(prox_penalty(&dvector![1.0], &mcp, 1.0).is_err());
}
