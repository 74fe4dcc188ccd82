//! Values reported for the full-scale numerical examples, reproduced with the
//! two-bump stand-in source.

use heat_inverse::experiments::{
    run_lambda_sweep, ExperimentConfig, ExperimentKind, Scenario, SolverKind, SourcePreset,
};
use heat_inverse::inversion::{initial_lambda, lambda_rule, select_lambda, SelectOptions, StopReason};
use heat_inverse::sensing::{NoiseModel, SensorSet};

fn full_scale() -> ExperimentConfig {
    ExperimentConfig {
        h: 1.0 / 32.0,
        tau: 1.0 / 64.0,
        sensors_k: 500,
        sigma: 1e-3,
        source_preset: SourcePreset::P1,
        ..ExperimentConfig::for_experiment(ExperimentKind::SelectLambda)
    }
}

#[test]
fn five_hundred_per_side_is_a_quarter_million_sensors() {
    assert_eq!(SensorSet::uniform(500).unwrap().len(), 250_000);
    assert_eq!(SensorSet::uniform(100).unwrap().len(), 10_000);
}

#[test]
fn initial_guess_at_quarter_million() {
    // (25e4)^(-2/3) = 2.5198e-4
    let l0 = initial_lambda(250_000, 2);
    assert!((l0 - 250_000f64.powf(-2.0 / 3.0)).abs() < 1e-18);
    assert!((l0 / 2.5e-4 - 1.0).abs() < 0.01);
}

#[test]
fn noise_sample_std_at_quarter_million() {
    let e = NoiseModel::gaussian(1e-3, 42).draw(250_000).unwrap();
    let n = e.len() as f64;
    let mean = e.iter().sum::<f64>() / n;
    let std = (e.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!((0.000_99..=0.001_01).contains(&std), "{std}");
}

#[test]
fn fixed_point_iteration_at_full_scale() {
    let cfg = full_scale();
    let scenario = Scenario::from_config(&cfg).unwrap();
    let data = scenario.measurements(NoiseModel::gaussian(cfg.sigma, cfg.seed)).unwrap().values;
    let solver = scenario.solver(SolverKind::Auto).unwrap();
    assert!(solver.is_dense());
    let trace = select_lambda(&solver, &data, &SelectOptions::default()).unwrap();

    assert_eq!(trace.stop_reason, StopReason::Converged);
    // λ_{n,4}: four updates of the initial guess.
    assert_eq!(trace.n_iterations(), 4);
    assert!((trace.lambda / 5.53e-8 - 1.0).abs() < 0.05, "{}", trace.lambda);
    assert!((trace.result.residual_n / 9.99e-4 - 1.0).abs() < 0.01, "{}", trace.result.residual_n);
    assert!(trace.identity_defect(data.len(), 2) < 1e-8);

    // The selected value sits next to the a-priori rule.
    let rule = lambda_rule(cfg.sigma, data.len(), cfg.source_preset.l2_norm(), 2).unwrap();
    assert!((trace.lambda / rule).log10().abs() < 0.1);
}

#[test]
fn optimal_decade_for_large_noise() {
    let cfg = ExperimentConfig {
        h: 1.0 / 32.0,
        tau: 1.0 / 64.0,
        sensors_k: 100,
        sigma: 0.1,
        ..ExperimentConfig::for_experiment(ExperimentKind::LambdaSweep)
    };
    let r = run_lambda_sweep(&cfg).unwrap();
    assert_eq!(r.rows.len(), 10);
    assert!((r.argmin_lambda / 1e-4).log10().abs() <= 1.0, "{}", r.argmin_lambda);
}
