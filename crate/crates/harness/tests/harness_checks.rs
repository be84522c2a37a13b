//! Harness-level behavior: determinism, seed stability, estimator selection,
//! output round-trips and the high-SNR sanity limit.

use std::path::Path;

use sirpdoa::config::ExperimentConfig;
use sirpdoa::runner::{generate_trial_data, run_experiment, run_trial};
use sirpdoa::seed::derive_seed;
use sirpdoa::{matched_sq_error_deg, render_csv};
use sirpdoa_core::{DoaEstimator, EstimatorRegistry};

fn config_json(estimators: &str, trials: usize, snrs: &str) -> String {
    format!(
        r#"{{
            "array": {{ "sensors": 6 }},
            "true_doas_deg": [30.0, 60.0],
            "snapshots": 10,
            "noise": {{ "texture": "t", "shape_a": 1.1, "scale_b": 2.0 }},
            "snr_grid_db": {snrs},
            "trials": {trials},
            "estimators": {estimators},
            "stop": {{ "max_iterations": 4, "theta_tolerance_deg": 0.00573 }},
            "master_seed": 424242
        }}"#
    )
}

fn build_estimators(
    experiment: &sirpdoa::ResolvedExperiment,
) -> Vec<(String, Box<dyn DoaEstimator>)> {
    let registry = EstimatorRegistry::with_builtins();
    experiment
        .estimator_names
        .iter()
        .map(|n| (n.clone(), registry.build(n, &experiment.options).unwrap()))
        .collect()
}

#[test]
fn shipped_example_configs_are_valid() {
    for name in ["fig1_t_noise.json", "fig2_k_noise.json"] {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(name);
        let cfg = ExperimentConfig::from_path(&path).unwrap();
        assert!(cfg.validation_errors().is_empty(), "{name} invalid");
        let resolved = cfg.resolve().unwrap();
        assert_eq!(resolved.estimator_names, vec!["CMLE", "IMAPE", "IMLE"]);
        assert_eq!(resolved.trials, 100);
    }
}

#[test]
fn identical_seeds_give_identical_trials() {
    let cfg = ExperimentConfig::from_json(&config_json(r#"["CMLE","IMLE","IMAPE"]"#, 1, "[20.0]"))
        .unwrap();
    let experiment = cfg.resolve().unwrap();
    let estimators = build_estimators(&experiment);
    let seed = derive_seed(experiment.master_seed, &[0, 0]);
    let a = run_trial(&experiment, &estimators, 20.0, 0, seed).unwrap();
    let b = run_trial(&experiment, &estimators, 20.0, 0, seed).unwrap();
    for (oa, ob) in a.outcomes.iter().zip(b.outcomes.iter()) {
        assert_eq!(oa.name, ob.name);
        assert_eq!(oa.theta_deg, ob.theta_deg, "{} not reproducible", oa.name);
    }
}

#[test]
fn estimator_selection_controls_outcomes() {
    let cfg = ExperimentConfig::from_json(&config_json(r#"["CMLE"]"#, 1, "[20.0]")).unwrap();
    let experiment = cfg.resolve().unwrap();
    let estimators = build_estimators(&experiment);
    let seed = derive_seed(experiment.master_seed, &[0, 0]);
    let result = run_trial(&experiment, &estimators, 20.0, 0, seed).unwrap();
    assert_eq!(result.outcomes.len(), 1);
    assert_eq!(result.outcomes[0].name, "CMLE");
}

#[test]
fn trial_data_is_independent_of_trial_count() {
    // trial k's data depends only on (master seed, snr index, trial index)
    let cfg3 = ExperimentConfig::from_json(&config_json(r#"["CMLE"]"#, 3, "[20.0]")).unwrap();
    let cfg5 = ExperimentConfig::from_json(&config_json(r#"["CMLE"]"#, 5, "[20.0]")).unwrap();
    let e3 = cfg3.resolve().unwrap();
    let e5 = cfg5.resolve().unwrap();
    for trial in 0..3u64 {
        let s3 = derive_seed(e3.master_seed, &[0, trial]);
        let s5 = derive_seed(e5.master_seed, &[0, trial]);
        assert_eq!(s3, s5);
        let d3 = generate_trial_data(&e3, 20.0, s3).unwrap();
        let d5 = generate_trial_data(&e5, 20.0, s5).unwrap();
        assert_eq!(d3.snapshots.matrix(), d5.snapshots.matrix());
    }
}

#[test]
fn experiment_reruns_are_byte_identical() {
    let cfg = ExperimentConfig::from_json(&config_json(
        r#"["CMLE","IMLE"]"#,
        4,
        "[15.0, 20.0]",
    ))
    .unwrap();
    let experiment = cfg.resolve().unwrap();
    let first = run_experiment(&experiment).unwrap();
    let second = run_experiment(&experiment).unwrap();
    assert_eq!(render_csv(&first.table), render_csv(&second.table));
    // rows are ordered: SNR ascending, then estimator name ascending
    let names: Vec<&str> = first.table.rows.iter().map(|r| r.estimator.as_str()).collect();
    assert_eq!(names, vec!["CMLE", "IMLE", "CMLE", "IMLE"]);
    assert!(first.table.rows[0].snr_db <= first.table.rows[2].snr_db);
}

#[test]
fn high_snr_trials_pin_both_sources() {
    let cfg =
        ExperimentConfig::from_json(&config_json(r#"["CMLE","IMLE","IMAPE"]"#, 1, "[60.0]"))
            .unwrap();
    let experiment = cfg.resolve().unwrap();
    let estimators = build_estimators(&experiment);
    let seed = derive_seed(experiment.master_seed, &[0, 0]);
    let result = run_trial(&experiment, &estimators, 60.0, 0, seed).unwrap();
    for outcome in &result.outcomes {
        assert!(outcome.error.is_none(), "{}: {:?}", outcome.name, outcome.error);
        let err = matched_sq_error_deg(&outcome.theta_deg, &experiment.truth_deg).unwrap();
        assert!(
            err.sqrt() < 0.05,
            "{} off by {} degrees RMS at 60 dB",
            outcome.name,
            err.sqrt()
        );
    }
}

#[test]
fn cmle_is_accurate_under_white_gaussian_noise() {
    // sanity anchor: RMSE below 1 degree at 20 dB when its model is correct
    use nalgebra::DMatrix;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use sirpdoa_core::{generate_waveforms, synthesize, ArrayGeometry, DoaVector, GridSpec};

    let geometry = ArrayGeometry::ula(6).unwrap();
    let truth = DoaVector::from_degrees(&[30.0, 60.0]).unwrap();
    let registry = EstimatorRegistry::with_builtins();
    let cmle = registry
        .build(
            "cmle",
            &sirpdoa_core::EstimatorOptions {
                geometry: geometry.clone(),
                num_sources: 2,
                grid: GridSpec::default_search(),
                stop: sirpdoa_core::StopCriterion::default(),
                texture_kind: None,
            },
        )
        .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut sq_sum = 0.0;
    let trials = 100;
    for _ in 0..trials {
        // white unit-variance complex noise, waveform power for 20 dB:
        // SNR = sum||s||^2 / (T * 1 * N) = per_sample * M / N
        let per_sample = 100.0 * 6.0 / 2.0;
        let s = generate_waveforms(2, 10, per_sample, &mut rng).unwrap();
        let noise = DMatrix::from_fn(6, 10, |_, _| {
            let re: f64 = rng.random::<f64>() - 0.5;
            let im: f64 = rng.random::<f64>() - 0.5;
            // uniform(-.5,.5) has variance 1/12 per part; scale to 1/2 per part
            Complex64::new(re, im) * Complex64::from(6f64.sqrt())
        });
        let x = synthesize(&geometry, &truth, &s, &noise).unwrap();
        let report = cmle.estimate(&x, 0).unwrap();
        sq_sum += matched_sq_error_deg(&report.theta_degrees(), &[30.0, 60.0]).unwrap();
    }
    let rmse = (sq_sum / trials as f64).sqrt();
    assert!(rmse < 1.0, "CMLE RMSE {rmse} degrees under Gaussian noise");
}

#[test]
fn mse_of_exact_estimates_is_zero() {
    let truth = [30.0, 60.0];
    let mse = sirpdoa::mse_permutation_matched(
        &[truth.to_vec(), vec![60.0, 30.0]],
        &truth,
    )
    .unwrap();
    assert_eq!(mse, 0.0);
}
