//! Monte-Carlo experiment runner: per-trial data synthesis, estimator
//! execution, and MSE aggregation. Trials are independent and run in
//! parallel; every random stream is derived from the master seed and the
//! cell's indices, so results do not depend on scheduling.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use sirpdoa_core::{
    db_to_linear, generate_waveforms, sample_noise, scale_waveforms_to_snr, synthesize,
    DoaEstimator, EstimatorRegistry, NoiseBlock, Snapshots, SourceWaveforms, SpeckleCovariance,
};

use crate::config::ResolvedExperiment;
use crate::error::Result;
use crate::mse::{matched_sq_error_deg, MseRow, MseTable};
use crate::seed::{derive_seed, PURPOSE_ESTIMATOR, PURPOSE_NOISE, PURPOSE_WAVEFORMS};

/// Synthesized inputs for one trial.
pub struct TrialData {
    pub snapshots: Snapshots,
    pub waveforms: SourceWaveforms,
    pub noise: NoiseBlock,
    pub covariance: SpeckleCovariance,
}

/// Everything recorded about one estimator run within a trial.
#[derive(Debug, Clone)]
pub struct EstimatorOutcome {
    pub name: String,
    pub theta_deg: Vec<f64>,
    pub iterations: usize,
    pub wall_ms: f64,
    pub tau_floored: bool,
    pub shape_clamped: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct TrialResult {
    pub snr_db: f64,
    pub trial_index: usize,
    pub outcomes: Vec<EstimatorOutcome>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResults {
    pub table: MseTable,
    pub trials: Vec<TrialResult>,
    pub warnings: Vec<String>,
}

/// Build the speckle covariance the experiments use: the reference recipe,
/// trace normalized.
pub fn true_covariance(sensors: usize) -> Result<SpeckleCovariance> {
    let raw = sirpdoa_core::build_speckle_covariance(sensors, 1.0)?;
    Ok(sirpdoa_core::numerics::normalize_trace(&raw)?)
}

/// Deterministic trial data from the trial seed: waveforms scaled to the
/// requested SNR plus a SIRP noise block.
pub fn generate_trial_data(
    experiment: &ResolvedExperiment,
    snr_db: f64,
    trial_seed: u64,
) -> Result<TrialData> {
    let covariance = true_covariance(experiment.geometry.sensors())?;
    let mut wave_rng =
        ChaCha8Rng::seed_from_u64(derive_seed(trial_seed, &[PURPOSE_WAVEFORMS]));
    let raw = generate_waveforms(
        experiment.truth.len(),
        experiment.snapshots,
        1.0,
        &mut wave_rng,
    )?;
    let waveforms = scale_waveforms_to_snr(
        &raw,
        db_to_linear(snr_db),
        &experiment.texture,
        &covariance,
    )?;
    let mut noise_rng = ChaCha8Rng::seed_from_u64(derive_seed(trial_seed, &[PURPOSE_NOISE]));
    let noise = sample_noise(
        &experiment.texture,
        &covariance,
        experiment.snapshots,
        &mut noise_rng,
    )?;
    let snapshots = synthesize(
        &experiment.geometry,
        &experiment.truth,
        &waveforms,
        noise.noise(),
    )?;
    Ok(TrialData {
        snapshots,
        waveforms,
        noise,
        covariance,
    })
}

/// Run every selected estimator on one synthesized block. Estimator failures
/// are recorded, never propagated.
pub fn run_trial(
    experiment: &ResolvedExperiment,
    estimators: &[(String, Box<dyn DoaEstimator>)],
    snr_db: f64,
    trial_index: usize,
    trial_seed: u64,
) -> Result<TrialResult> {
    let data = generate_trial_data(experiment, snr_db, trial_seed)?;
    let estimator_seed = derive_seed(trial_seed, &[PURPOSE_ESTIMATOR]);
    let outcomes = estimators
        .iter()
        .map(|(name, estimator)| {
            let start = Instant::now();
            match estimator.estimate(&data.snapshots, estimator_seed) {
                Ok(report) => EstimatorOutcome {
                    name: name.clone(),
                    theta_deg: report.theta_degrees(),
                    iterations: report.iterations_used,
                    wall_ms: start.elapsed().as_secs_f64() * 1e3,
                    tau_floored: report.tau_floored,
                    shape_clamped: report.shape_clamped,
                    error: None,
                },
                Err(err) => EstimatorOutcome {
                    name: name.clone(),
                    theta_deg: Vec::new(),
                    iterations: 0,
                    wall_ms: start.elapsed().as_secs_f64() * 1e3,
                    tau_floored: false,
                    shape_clamped: false,
                    error: Some(err.to_string()),
                },
            }
        })
        .collect();
    Ok(TrialResult {
        snr_db,
        trial_index,
        outcomes,
    })
}

/// Full sweep: every SNR point times every trial, aggregated into the MSE
/// table. Failed estimator runs are excluded from the aggregate and counted.
pub fn run_experiment(experiment: &ResolvedExperiment) -> Result<ExperimentResults> {
    let registry = EstimatorRegistry::with_builtins();
    let estimators: Vec<(String, Box<dyn DoaEstimator>)> = experiment
        .estimator_names
        .iter()
        .map(|name| {
            registry
                .build(name, &experiment.options)
                .map(|e| (name.clone(), e))
        })
        .collect::<sirpdoa_core::Result<_>>()?;

    let cells: Vec<(usize, usize)> = (0..experiment.snr_grid_db.len())
        .flat_map(|s| (0..experiment.trials).map(move |t| (s, t)))
        .collect();
    let mut trials: Vec<TrialResult> = cells
        .par_iter()
        .map(|&(snr_idx, trial_idx)| {
            let snr_db = experiment.snr_grid_db[snr_idx];
            let trial_seed = derive_seed(
                experiment.master_seed,
                &[snr_idx as u64, trial_idx as u64],
            );
            run_trial(experiment, &estimators, snr_db, trial_idx, trial_seed)
        })
        .collect::<Result<_>>()?;
    trials.sort_by(|a, b| {
        a.snr_db
            .partial_cmp(&b.snr_db)
            .expect("finite SNR")
            .then(a.trial_index.cmp(&b.trial_index))
    });

    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for &snr_db in &experiment.snr_grid_db {
        for name in &experiment.estimator_names {
            let mut errors = Vec::new();
            let mut failed = 0usize;
            for trial in trials.iter().filter(|t| t.snr_db == snr_db) {
                let outcome = trial
                    .outcomes
                    .iter()
                    .find(|o| &o.name == name)
                    .expect("every trial ran every estimator");
                if outcome.error.is_some() {
                    failed += 1;
                } else {
                    errors.push(matched_sq_error_deg(
                        &outcome.theta_deg,
                        &experiment.truth_deg,
                    )?);
                }
            }
            if failed * 10 > experiment.trials {
                warnings.push(format!(
                    "{name} failed on {failed}/{} trials at {snr_db} dB",
                    experiment.trials
                ));
            }
            let mse = if errors.is_empty() {
                f64::NAN
            } else {
                errors.iter().sum::<f64>() / errors.len() as f64
            };
            rows.push(MseRow {
                snr_db,
                estimator: name.clone(),
                mse_deg2: mse,
                trials: errors.len(),
                failed_trials: failed,
            });
        }
    }
    Ok(ExperimentResults {
        table: MseTable { rows },
        trials,
        warnings,
    })
}

/// Per-trial matched squared errors for one estimator at one SNR
/// (successful trials only), in trial order.
pub fn per_trial_errors(
    results: &ExperimentResults,
    truth_deg: &[f64],
    snr_db: f64,
    estimator: &str,
) -> Vec<f64> {
    results
        .trials
        .iter()
        .filter(|t| t.snr_db == snr_db)
        .flat_map(|t| {
            t.outcomes
                .iter()
                .filter(|o| o.name == estimator && o.error.is_none())
                .map(|o| matched_sq_error_deg(&o.theta_deg, truth_deg).expect("same length"))
        })
        .collect()
}
