//! Monte-Carlo harness for benchmarking the DOA estimator family under
//! compound-Gaussian noise: configuration, reproducible seeding, a parallel
//! trial runner, permutation-matched MSE aggregation and result emission.

pub mod config;
pub mod error;
pub mod mse;
pub mod output;
pub mod runner;
pub mod seed;

pub use config::{ExperimentConfig, ResolvedExperiment};
pub use error::{HarnessError, Result};
pub use mse::{bootstrap_mean_ci, matched_sq_error_deg, mse_permutation_matched, MseRow, MseTable};
pub use output::{parse_csv, render_csv, render_plot_data, write_results, RunMetadata};
pub use runner::{
    generate_trial_data, per_trial_errors, run_experiment, run_trial, true_covariance,
    EstimatorOutcome, ExperimentResults, TrialData, TrialResult,
};
