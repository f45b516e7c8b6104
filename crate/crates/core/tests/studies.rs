//! Small simulation studies with known answers.

use gas_inar_core::diagnostics::{alpha_confidence_bands, contraction_check, DEFAULT_GRID};
use gas_inar_core::estimation::{fit, FitOptions};
use gas_inar_core::simulation::simulate_model;
use gas_inar_core::{run_filter, ErrorSpec, GasParams, ModelSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn recovery_params() -> GasParams {
    GasParams::with_mean_logit(-0.5, 0.9, 0.15, ErrorSpec::poisson(6.0))
}

#[test]
fn bands_cover_the_true_path() {
    let truth = ModelSpec::gas(recovery_params());
    let sim = simulate_model(&truth, 1000, &mut ChaCha8Rng::seed_from_u64(21)).unwrap();
    let f = fit(truth.kind(), &sim.series, &FitOptions::default()).unwrap();
    let bands =
        alpha_confidence_bands(&sim.series, &f, &[0.8, 0.95], 1000, &mut ChaCha8Rng::seed_from_u64(22)).unwrap();
    assert!(bands.approximate);
    let b95 = &bands.bands[1];
    let inside =
        sim.true_alpha[1..].iter().enumerate().filter(|(t, a)| b95.lower[*t] <= **a && **a <= b95.upper[*t]).count();
    let share = inside as f64 / bands.alpha_hat.len() as f64;
    assert!(share >= 0.8, "coverage {share}");
}

#[test]
fn contraction_implication_on_simulated_paths() {
    let params = recovery_params();
    for seed in 0..3 {
        let sim = simulate_model(&ModelSpec::gas(params), 1000, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let r = contraction_check(&sim.series, &params, DEFAULT_GRID).unwrap();
        assert!(r.empirical_value <= r.sufficient_value + 1e-9);
        if r.satisfied_sufficient {
            assert!(r.satisfied_empirical);
        }
    }
}

#[test]
fn filters_forget_their_start() {
    let params = recovery_params();
    let sim = simulate_model(&ModelSpec::gas(params), 1000, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
    let a = run_filter(&sim.series, &params, Some(-2.0)).unwrap();
    let b = run_filter(&sim.series, &params, Some(2.0)).unwrap();
    for t in 500..a.len() {
        assert!((a.lambda[t] - b.lambda[t]).abs() < 1e-8);
    }
}

#[test]
fn fit_recovers_parameters_at_large_t() {
    let params = recovery_params();
    let sim = simulate_model(&ModelSpec::gas(params), 4000, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
    let f = fit(ModelSpec::gas(params).kind(), &sim.series, &FitOptions::default()).unwrap();
    let se = f.std_errors.clone().unwrap();
    for (i, (est, truth)) in f.model.natural_params().iter().zip(ModelSpec::gas(params).natural_params()).enumerate() {
        assert!((est - truth).abs() < 4.0 * se[i], "param {i}: {est} vs {truth}, se {}", se[i]);
    }
}
