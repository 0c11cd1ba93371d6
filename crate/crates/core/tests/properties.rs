//! Randomized invariants over the admissible parameter region.

use ces_core::coherent::{coherent_coeffs, eigenvalue_residual, f_functional, overlap, overlap_closed_form, uncertainty_product};
use ces_core::fock::{casimir_residual, closure_report, ladder_constant, ladder_offset, psi};
use ces_core::measure::{moment, structure_product};
use ces_core::model::{ModelParams, Phase};
use ces_core::specfun::{gamma, hyper_0f3, hyper_0f3_complex, kummer_1f1, pochhammer};
use num_complex::Complex64;
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Broken phase with `ε` strictly inside `ε > −2γ−2`.
fn broken_params() -> impl Strategy<Value = ModelParams> {
    (0.0..4.0f64, 0.05..1.0f64, 0.0..8.0f64)
        .prop_map(|(g, margin, span)| ModelParams::broken(g, -2.0 * g - 2.0 + margin + span).unwrap())
}

/// Unbroken phase; parameter points where `u` has a node are rejected.
fn unbroken_params() -> impl Strategy<Value = ModelParams> {
    (0.0..4.0f64, -0.9..6.0f64).prop_filter_map("u has a node", |(g, e)| ModelParams::unbroken(g, e).ok())
}

fn any_params() -> impl Strategy<Value = ModelParams> {
    prop_oneof![broken_params(), unbroken_params()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ladder_closure_holds(p in any_params()) {
        prop_assert!(closure_report(&p, 32).unwrap().max_relative() < 1e-12);
        prop_assert!(casimir_residual(&p, 32).unwrap().relative() < 1e-9);
    }

    #[test]
    fn psi_reproduces_structure_constants(p in any_params(), n in 0usize..50) {
        let lam = ladder_constant(&p, n + 1).unwrap();
        prop_assert!(rel(psi(&p, p.energy(n + ladder_offset(&p))), lam * lam) < 1e-11);
    }

    #[test]
    fn moments_are_structure_products(p in any_params(), n in 0usize..12) {
        prop_assert!(rel(moment(&p, n), structure_product(&p, n).unwrap()) < 1e-12);
    }

    #[test]
    fn spectrum_spacing_is_two(p in any_params(), n in 0usize..100) {
        let m = n + ladder_offset(&p);
        prop_assert!((p.energy(m + 1) - p.energy(m) - 2.0).abs() < 1e-12);
        if p.phase() == Phase::Unbroken {
            // the zero mode sits 1 + ε below the first excited level
            prop_assert_eq!(p.energy(0), 0.0);
            prop_assert!((p.energy(1) - 1.0 - p.epsilon()).abs() < 1e-12);
        } else {
            prop_assert!(p.energy(0) > 0.0);
        }
    }

    #[test]
    fn coherent_states_are_eigenstates(p in any_params(), r in 0.0..15.0f64, theta in -3.2..3.2f64) {
        let state = coherent_coeffs(&p, Complex64::from_polar(r, theta), 1e-15).unwrap();
        prop_assert!(eigenvalue_residual(&state).unwrap() < 1e-10);
        prop_assert!((state.norm_sqr() - 1.0).abs() < 1e-12);
        let u = uncertainty_product(&state).unwrap();
        prop_assert!(u.relative_gap() < 1e-8);
        prop_assert!(rel(f_functional(&state).unwrap(), u.phi_mean) < 1e-8);
    }

    #[test]
    fn overlap_matches_closed_form(p in any_params(), a in (-6.0..6.0f64, -6.0..6.0f64), b in (-6.0..6.0f64, -6.0..6.0f64)) {
        let sa = coherent_coeffs(&p, Complex64::new(a.0, a.1), 1e-16).unwrap();
        let sb = coherent_coeffs(&p, Complex64::new(b.0, b.1), 1e-16).unwrap();
        let closed = overlap_closed_form(&sa, &sb).unwrap();
        prop_assert!((overlap(&sa, &sb).unwrap() - closed).norm() < 1e-10 * closed.norm().max(1e-300));
    }

    #[test]
    fn kummer_transformation(a in -3.0..3.0f64, b in 0.6..6.0f64, z in 0.0..12.0f64) {
        let lhs = kummer_1f1(a, b, z).unwrap();
        let rhs = z.exp() * kummer_1f1(b - a, b, -z).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * lhs.abs().max(1.0));
    }

    #[test]
    fn gamma_recurrence(x in 0.1..30.0f64) {
        prop_assert!(rel(gamma(x + 1.0), x * gamma(x)) < 1e-12);
        prop_assert!(rel(pochhammer(x, 3), x * (x + 1.0) * (x + 2.0)) < 1e-12);
    }

    #[test]
    fn hyper_0f3_complex_agrees_on_real_axis(b1 in 0.5..5.0f64, b2 in 0.5..5.0f64, b3 in 0.5..5.0f64, z in 0.0..50.0f64) {
        let b = [b1, b2, b3];
        let c = hyper_0f3_complex(b, Complex64::new(z, 0.0)).unwrap();
        prop_assert!(rel(c.re, hyper_0f3(b, z).unwrap()) < 1e-12);
        prop_assert!(c.im.abs() <= 1e-14 * c.re.abs());
    }
}
