mod common;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use proptest::prelude::*;
use rand::Rng;
use spinpair::characterize::{label_for_outcome, outcome_for};
use spinpair::control::Bound;
use spinpair::{
    bell_coefficients, bell_state, circuit_realization, controlled_emission, feasible,
    fidelity_up_to_phase, infer_ndelta, infer_parameters, nonlocal_bell_measurement,
    populations_analytic, populations_exact, region_grid, seeded_rng, solve_ndelta,
    species_moments, BellLabel, ControlKnob, InferenceError, SourceSpec, SteeringError,
};

/// Closed-form `(f00, f01, f11)` for given `γ`, `C²`, `S²`, `nδ`.
fn forward(gamma: f64, c2: f64, s2: f64, ndelta: f64) -> [f64; 3] {
    let (sg, cg) = gamma.sin_cos();
    let (sp, cp) = (2.0 * PI * ndelta).sin_cos();
    let (cg2, sg2, cp2, sp2) = (cg * cg, sg * sg, cp * cp, sp * sp);
    [cg2 * cp2 + c2 * sg2 * sp2, s2 * sg2, c2 * sg2 * cp2 + cg2 * sp2]
}

#[test]
fn analytic_normalized_matches_born_rule() {
    let mut rng = seeded_rng(31);
    for _ in 0..500 {
        let spec = common::random_spec(&mut rng);
        let knob = common::random_knob(&mut rng);
        let emission = controlled_emission(&spec, &knob).unwrap();
        let exact = populations_exact(&emission.state).unwrap().normalized;
        let analytic = populations_analytic(&spec, &knob).normalized;
        assert!(exact.max_abs_diff(&analytic) < 1e-12, "{exact:?} vs {analytic:?}");
        assert!(exact.f10.abs() < 1e-12);
        assert!((exact.sum() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn raw_sum_matches_emission_norm() {
    let mut rng = seeded_rng(32);
    for _ in 0..300 {
        let spec = common::random_spec(&mut rng);
        let knob = common::random_knob(&mut rng);
        let raw = populations_analytic(&spec, &knob).raw;
        let m = species_moments(&spec);
        let expected = 1.0 + spec.gamma().sin().powi(2) * 2.0 * spec.species_overlap();
        assert!((raw.sum() - expected).abs() < 1e-12);
        let (sg, cg) = spec.gamma().sin_cos();
        assert!((raw.f00 + raw.f11 - (cg * cg + sg * sg * m.c * m.c)).abs() < 1e-12);
        assert_eq!(raw.f10, 0.0);
    }
}

#[test]
fn orthogonal_species_give_unit_moments() {
    let mut rng = seeded_rng(33);
    for _ in 0..300 {
        let gamma = rng.random_range(0.0..=FRAC_PI_2);
        let spec = common::random_orthogonal_spec(&mut rng, gamma);
        let knob = common::random_knob(&mut rng);
        let m = species_moments(&spec);
        assert!((m.c * m.c + m.s * m.s - 1.0).abs() < 1e-12);
        let table = populations_analytic(&spec, &knob);
        assert!((table.raw.sum() - 1.0).abs() < 1e-12);
        assert!(table.raw.max_abs_diff(&table.normalized) < 1e-12);
    }
}

#[test]
fn outcome_labels_round_trip() {
    for label in BellLabel::ALL {
        let (i3, j4) = outcome_for(label);
        assert_eq!(label_for_outcome(i3, j4), label);
    }
    assert_eq!(outcome_for(BellLabel::B10), (1, 1));
    assert_eq!(outcome_for(BellLabel::B11), (1, 0));
}

#[test]
fn circuit_reproduces_projective_measurement() {
    let mut rng = seeded_rng(34);
    let circuit = circuit_realization();
    for _ in 0..50 {
        let state = common::random_state(&mut rng, 2);
        let weights = bell_coefficients(&state).unwrap().map(|c| c.norm_sqr());
        let pops = circuit.populations(&state).unwrap();
        for label in BellLabel::ALL {
            let (i3, j4) = outcome_for(label);
            assert!((pops.get(i3, j4) - weights[label.index()]).abs() < 1e-12);
        }
        for branch in circuit.branches(&state).unwrap() {
            let r = &branch.record;
            let expected = bell_state(r.label());
            assert!((fidelity_up_to_phase(&r.post_state, &expected).unwrap() - 1.0).abs() < 1e-12);
            assert!((r.probability - weights[r.label().index()]).abs() < 1e-12);
        }
    }
}

#[test]
fn circuit_sampling_agrees_with_projective_sampling() {
    let circuit = circuit_realization();
    let spec = SourceSpec::new(FRAC_PI_4, 1.0, 0.0, FRAC_PI_2, 0.0).unwrap();
    let knob = ControlKnob::from_ndelta(0.125).unwrap();
    let state = controlled_emission(&spec, &knob).unwrap().state;
    let shots = 40_000;
    let mut via_circuit = [0u32; 4];
    let mut via_projection = [0u32; 4];
    let (mut a, mut b) = (seeded_rng(1), seeded_rng(2));
    for _ in 0..shots {
        let r = circuit.run(&state, &mut a).unwrap();
        via_circuit[(2 * r.outcome.0 + r.outcome.1) as usize] += 1;
        let r = nonlocal_bell_measurement(&state, &mut b).unwrap();
        via_projection[(2 * r.outcome.0 + r.outcome.1) as usize] += 1;
    }
    let expected = [0.25, 0.5, 0.0, 0.25];
    for k in 0..4 {
        let sigma = (shots as f64 * expected[k] * (1.0 - expected[k])).sqrt();
        for counts in [via_circuit, via_projection] {
            assert!((counts[k] as f64 - shots as f64 * expected[k]).abs() <= 4.0 * sigma);
        }
    }
    assert_eq!(via_circuit[2], 0);
}

#[test]
fn post_measurement_states_ignore_the_knob() {
    let mut rng = seeded_rng(35);
    let circuit = circuit_realization();
    let spec = common::random_spec(&mut rng);
    let raw_pair = populations_analytic(&spec, &ControlKnob::from_ndelta(0.0).unwrap()).raw;
    for _ in 0..100 {
        let knob = common::random_knob(&mut rng);
        let state = controlled_emission(&spec, &knob).unwrap().state;
        for branch in circuit.branches(&state).unwrap() {
            let r = branch.record;
            let f = fidelity_up_to_phase(&r.post_state, &bell_state(r.label())).unwrap();
            assert!((f - 1.0).abs() < 1e-12);
        }
        let raw = populations_analytic(&spec, &knob).raw;
        assert!((raw.f00 + raw.f11 - raw_pair.f00 - raw_pair.f11).abs() < 1e-12);
    }
}

#[test]
fn steering_round_trip() {
    let mut rng = seeded_rng(36);
    for _ in 0..300 {
        let gamma = rng.random_range(0.1..=FRAC_PI_2);
        let c2: f64 = rng.random_range(0.0..=1.0);
        let ndelta = rng.random_range(0.0..=0.25);
        let [f00, _, f11] = forward(gamma, c2, 1.0 - c2, ndelta);
        let sol = match solve_ndelta(gamma, f00, f11) {
            Err(SteeringError::Degenerate(_)) => continue,
            other => other.unwrap(),
        };
        let truth = (2.0 * PI * ndelta).sin().powi(2);
        assert!((sol.s_squared - truth).abs() < 1e-9, "{gamma} {c2} {ndelta}");
        assert!((sol.required_c_squared - c2).abs() < 1e-9);
        assert!((sol.required_c_squared + sol.required_s_squared - 1.0).abs() < 1e-12);
        let (sg, cg) = gamma.sin_cos();
        assert!((cg * cg + sg * sg * sol.required_c_squared - f00 - f11).abs() < 1e-12);
    }
}

#[test]
fn principal_branch_reproduces_targets() {
    let mut rng = seeded_rng(37);
    let mut checked = 0;
    while checked < 300 {
        let gamma = rng.random_range(0.05..=FRAC_PI_2);
        let (f00, f11) = (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
        let Ok(sol) = solve_ndelta(gamma, f00, f11) else { continue };
        assert!((0.0..=0.25).contains(&sol.ndelta_principal));
        let [g00, g01, g11] = forward(gamma, sol.required_c_squared, sol.required_s_squared, sol.ndelta_principal);
        assert!((g00 - f00).abs() < 1e-12 && (g11 - f11).abs() < 1e-12, "{gamma} {f00} {f11}");
        assert!((g00 + g01 + g11 - 1.0).abs() < 1e-12);
        assert!((infer_ndelta(f00, f11, gamma).unwrap() - sol.ndelta_principal).abs() == 0.0);
        checked += 1;
    }
}

#[test]
fn region_grid_matches_pointwise_calls() {
    let grid = region_grid(FRAC_PI_4, 21).unwrap();
    assert_eq!(grid.len(), 441);
    for (k, point) in grid.iter().enumerate() {
        let (r, c) = (k / 21, k % 21);
        assert_eq!(point.f00_target, r as f64 / 20.0);
        assert_eq!(point.f11_target, c as f64 / 20.0);
        assert_eq!(point, &feasible(FRAC_PI_4, point.f00_target, point.f11_target));
        assert_eq!(point.feasible, point.solution.is_some());
        if point.f00_target + point.f11_target > 1.0 + 1e-12 {
            assert!(!point.feasible);
        }
    }
    assert!(grid.iter().any(|p| p.feasible));
}

#[test]
fn infeasible_points_name_their_bound() {
    let p = feasible(FRAC_PI_4, 0.9, 0.9);
    assert_eq!(p.failure, Some(SteeringError::Infeasible(Bound::ProbabilityBudget)));
    let p = feasible(0.01, 0.1, 0.1);
    assert_eq!(p.failure, Some(SteeringError::Infeasible(Bound::SpeciesRange)));
}

#[test]
fn inference_round_trip() {
    let mut rng = seeded_rng(38);
    let mut checked = 0;
    while checked < 300 {
        let gamma = rng.random_range(0.1..=FRAC_PI_2);
        let spec = common::random_orthogonal_spec(&mut rng, gamma);
        let knob = common::random_knob(&mut rng);
        if (4.0 * PI * knob.ndelta()).cos().abs() <= 0.1 {
            continue;
        }
        let state = controlled_emission(&spec, &knob).unwrap().state;
        let f = populations_exact(&state).unwrap().normalized;
        let est = infer_parameters(f.f00, f.f01, f.f11, knob.ndelta()).unwrap();
        let m = species_moments(&spec);
        assert!((est.sin2_gamma - gamma.sin().powi(2)).abs() < 1e-9);
        assert!((est.c_squared - m.c * m.c).abs() < 1e-9);
        assert!((est.s_squared - m.s * m.s).abs() < 1e-9);
        assert!(est.residual < 1e-9);
        checked += 1;
    }
}

#[test]
fn inference_rejects_the_singular_setting() {
    let err = infer_parameters(0.4, 0.4, 0.2, 0.125).unwrap_err();
    assert!(matches!(err, InferenceError::Singular(_)));
    assert!(!err.is_precondition());
    let err = infer_parameters(0.4, 0.4, 0.2, 0.375).unwrap_err();
    assert!(matches!(err, InferenceError::Singular(_)));
}

proptest! {
    #[test]
    fn steering_only_moves_weight_between_two_species(
        gamma in 0.05..=FRAC_PI_2,
        f00 in 0.0..1.0f64,
        f11 in 0.0..1.0f64,
    ) {
        if let Ok(sol) = solve_ndelta(gamma, f00, f11) {
            let (sg, cg) = gamma.sin_cos();
            prop_assert!((cg * cg + sg * sg * sol.required_c_squared - f00 - f11).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&sol.s_squared));
            prop_assert!((sol.ndelta_principal - sol.s_squared.sqrt().asin() / (2.0 * PI)).abs() < 1e-15);
        }
    }

    #[test]
    fn inference_inverts_forward_populations(
        gamma in 0.2..=FRAC_PI_2,
        c2 in 0.0..=1.0f64,
        ndelta in 0.0..0.1f64,
    ) {
        let [f00, f01, f11] = forward(gamma, c2, 1.0 - c2, ndelta);
        let est = infer_parameters(f00, f01, f11, ndelta).unwrap();
        prop_assert!((est.sin2_gamma - gamma.sin().powi(2)).abs() < 1e-9);
        prop_assert!((est.c_squared - c2).abs() < 1e-9);
    }
}
