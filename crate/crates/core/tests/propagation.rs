use std::f64::consts::PI;

use proptest::prelude::*;
use ratchet_core::lattice::{build_model, initial_state, InputSpec, LatticeModel};
use ratchet_core::observables::intensity_profile;
use ratchet_core::propagators::green::{apply_green, propagate_green, propagate_green_with_sign};
use ratchet_core::propagators::rk4::{default_step, propagate_rk4_with_step};
use ratchet_core::propagators::spectral::{evolve_spectral, forward_transform, inverse_transform};
use ratchet_core::propagators::{propagate_series, propagate_spectral, MethodTag, PropagationMethod};
use ratchet_core::{Complex, FieldState};
use ratchet_oracles::brute_force_field;

fn model(beta_over_c: f64) -> LatticeModel<f64> {
    LatticeModel::with_default_width(1.0, beta_over_c).unwrap()
}

fn z_grid(beta: f64) -> Vec<f64> {
    (0..20).map(|i| 4.0 * PI / beta * i as f64 / 19.0).collect()
}

#[test]
fn green_and_rk4_match_independent_integrator() {
    let beta = 0.73;
    let m = build_model(30, 1.0, beta).unwrap();
    let phi = 37f64.to_radians();
    let input = InputSpec::new(1.0, phi).unwrap();
    let z = PI / beta;
    let reference = brute_force_field(1.0, beta, &[(0, (1.0, 0.0)), (1, (phi.cos(), phi.sin()))], z, 30, 40_000);
    let green = propagate_green(&m, &input, z).unwrap();
    let rk4 = propagate_rk4_with_step(&m, &initial_state(&m, &input).unwrap(), z, default_step(&m)).unwrap();
    for ((&(re, im), g), r) in reference.iter().zip(green.amplitudes()).zip(rk4.amplitudes()) {
        let want = Complex::new(re, im);
        assert!((g - want).norm() < 1e-9);
        assert!((r - want).norm() < 1e-9);
    }
}

#[test]
fn three_methods_agree_on_a_slice_of_the_grid() {
    for beta in [0.3, 0.73] {
        let m = model(beta);
        let grid = z_grid(beta);
        for (alpha, phi_deg) in [(0.0, 0.0), (0.5, 90.0), (1.0, 217.0)] {
            let input = InputSpec::from_degrees(alpha, phi_deg).unwrap();
            let green = propagate_series(&m, &input, &grid, &PropagationMethod::Green).unwrap();
            for tag in [MethodTag::Rk4, MethodTag::Spectral] {
                let other = propagate_series(&m, &input, &grid, &PropagationMethod::with_defaults(tag)).unwrap();
                for (a, b) in green.iter().zip(&other) {
                    assert!(a.max_abs_diff(b) < 1e-6, "{tag} beta={beta} alpha={alpha} z={}", a.z());
                }
            }
        }
    }
}

#[test]
fn revival_after_one_and_two_periods() {
    for beta in [0.3, 0.73, 2.0] {
        let m = model(beta);
        let input = InputSpec::from_degrees(1.0, 37.0).unwrap();
        let start = intensity_profile(&initial_state(&m, &input).unwrap());
        for periods in [1.0, 2.0] {
            let z = periods * 2.0 * PI / beta;
            for state in [propagate_green(&m, &input, z).unwrap(), propagate_spectral(&m, &input, z, m.site_count()).unwrap()] {
                let profile = intensity_profile(&state);
                let worst = profile.iter().zip(&start).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                assert!(worst < 1e-8, "beta={beta} periods={periods}: {worst:e}");
            }
        }
    }
}

#[test]
fn bloch_profile_is_symmetric() {
    let m = model(0.73);
    let input = InputSpec::new(0.0, 1.1).unwrap();
    for z in z_grid(0.73) {
        let state = propagate_green(&m, &input, z).unwrap();
        for j in 1..=40 {
            let (l, r) = (state.amplitude(-j).unwrap().norm_sqr(), state.amplitude(j).unwrap().norm_sqr());
            assert!((l - r).abs() < 1e-10);
        }
    }
}

#[test]
fn wrong_sign_breaks_amplitude_agreement_but_not_bloch_intensities() {
    let m = model(0.73);
    let z = 2.5;
    let bloch = InputSpec::single_site();
    let a = propagate_green_with_sign(&m, &bloch, z, 1.0).unwrap();
    let b = propagate_green_with_sign(&m, &bloch, z, -1.0).unwrap();
    let ia = intensity_profile(&a);
    let ib = intensity_profile(&b);
    assert!(ia.iter().zip(&ib).all(|(x, y)| (x - y).abs() < 1e-14));
    let rk4 = propagate_series(&m, &bloch, &[z], &PropagationMethod::Rk4 { step: None }).unwrap();
    assert!(b.max_abs_diff(&rk4[0]) < 1e-8);
    assert!(a.max_abs_diff(&rk4[0]) > 1e-2);
}

#[test]
fn spectral_evolution_composes() {
    let m = model(0.73);
    let input = InputSpec::from_degrees(0.5, 37.0).unwrap();
    let start = initial_state(&m, &input).unwrap();
    let k = m.site_count();
    let direct = evolve_spectral(&m, &start, 5.0, k).unwrap();
    let two_legs = evolve_spectral(&m, &evolve_spectral(&m, &start, 2.0, k).unwrap(), 3.0, k).unwrap();
    assert!(direct.max_abs_diff(&two_legs) < 1e-12);
    assert!((direct.z() - 5.0).abs() < 1e-15);
    let green = apply_green(&m, &start, 5.0).unwrap();
    assert!(direct.max_abs_diff(&green) < 1e-10);
}

#[test]
fn undersized_array_leaks() {
    let m = build_model(3, 1.0, 0.73).unwrap();
    assert!(!m.truncation_adequate());
    let state = propagate_green(&m, &InputSpec::single_site(), PI / 0.73).unwrap();
    assert!(ratchet_core::propagators::leakage_flagged(&state));
    assert!(state.total_power() < 1.0 - 1e-3);
}

#[test]
fn single_precision_green() {
    let m = LatticeModel::<f32>::with_default_width(1.0, 0.73).unwrap();
    let input = InputSpec::<f32>::from_degrees(1.0, 37.0).unwrap();
    let state = propagate_green(&m, &input, 3.0).unwrap();
    assert!((state.total_power() - 2.0).abs() < 1e-4);
}

fn random_state(values: &[(f64, f64)]) -> FieldState<f64> {
    FieldState::new(0.0, values.iter().map(|&(r, i)| Complex::new(r, i)).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn green_conserves_power(alpha in 0.0f64..2.0, phi in 0.0f64..6.3, beta in 0.2f64..3.0, z in 0.0f64..30.0) {
        let m = model(beta);
        let input = InputSpec::new(alpha, phi).unwrap();
        let state = propagate_green(&m, &input, z).unwrap();
        prop_assert!((state.total_power() - input.power()).abs() < 1e-9);
    }

    #[test]
    fn spectral_conserves_power(alpha in 0.0f64..2.0, phi in 0.0f64..6.3, beta in 0.2f64..3.0, z in 0.0f64..30.0) {
        let m = model(beta);
        let input = InputSpec::new(alpha, phi).unwrap();
        let state = propagate_spectral(&m, &input, z, m.site_count()).unwrap();
        prop_assert!((state.total_power() - input.power()).abs() < 1e-9);
    }

    #[test]
    fn transform_round_trip(values in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..20usize), extra in 0usize..4) {
        let mut values = values;
        if values.len() % 2 == 0 {
            values.pop();
        }
        prop_assume!(!values.is_empty());
        let state = random_state(&values);
        let points = state.amplitudes().len() + 2 * extra;
        let spectrum = forward_transform(&state, points).unwrap();
        prop_assert!((spectrum.power() - state.total_power()).abs() < 1e-12);
        let back = inverse_transform(&spectrum, state.half_width()).unwrap();
        prop_assert!(back.max_abs_diff(&state) < 1e-12);
    }
}
