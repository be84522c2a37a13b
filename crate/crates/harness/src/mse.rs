//! Permutation-matched squared-error aggregation and bootstrap intervals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{HarnessError, Result};

/// One aggregated row: estimator performance at one SNR point.
#[derive(Debug, Clone, PartialEq)]
pub struct MseRow {
    pub snr_db: f64,
    pub estimator: String,
    pub mse_deg2: f64,
    pub trials: usize,
    pub failed_trials: usize,
}

/// Rows ordered by SNR ascending, then estimator name ascending.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MseTable {
    pub rows: Vec<MseRow>,
}

impl MseTable {
    pub fn row(&self, snr_db: f64, estimator: &str) -> Option<&MseRow> {
        self.rows
            .iter()
            .find(|r| r.snr_db == snr_db && r.estimator == estimator)
    }
}

/// Mean squared angle error for one trial, minimized over source-to-estimate
/// pairings so a label swap never counts as error. Degrees squared.
pub fn matched_sq_error_deg(estimate_deg: &[f64], truth_deg: &[f64]) -> Result<f64> {
    if estimate_deg.len() != truth_deg.len() {
        return Err(HarnessError::Config(format!(
            "estimate has {} angles, truth has {}",
            estimate_deg.len(),
            truth_deg.len()
        )));
    }
    let m = truth_deg.len();
    let mut indices: Vec<usize> = (0..m).collect();
    let mut best = f64::INFINITY;
    permute(&mut indices, 0, &mut |perm| {
        let sum: f64 = perm
            .iter()
            .enumerate()
            .map(|(k, &p)| {
                let d = estimate_deg[p] - truth_deg[k];
                d * d
            })
            .sum();
        best = best.min(sum / m as f64);
    });
    Ok(best)
}

/// Average matched squared error over a set of trials.
pub fn mse_permutation_matched(estimates_deg: &[Vec<f64>], truth_deg: &[f64]) -> Result<f64> {
    if estimates_deg.is_empty() {
        return Err(HarnessError::Config("no estimates to average".into()));
    }
    let mut sum = 0.0;
    for est in estimates_deg {
        sum += matched_sq_error_deg(est, truth_deg)?;
    }
    Ok(sum / estimates_deg.len() as f64)
}

fn permute(indices: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == indices.len() {
        visit(indices);
        return;
    }
    for i in k..indices.len() {
        indices.swap(k, i);
        permute(indices, k + 1, visit);
        indices.swap(k, i);
    }
}

/// Percentile bootstrap confidence interval for the mean of `values`.
pub fn bootstrap_mean_ci(
    values: &[f64],
    resamples: usize,
    confidence: f64,
    seed: u64,
) -> (f64, f64) {
    assert!(!values.is_empty() && confidence > 0.0 && confidence < 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = values.len();
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| {
            (0..n)
                .map(|_| values[rng.random_range(0..n)])
                .sum::<f64>()
                / n as f64
        })
        .collect();
    means.sort_by(|a, b| a.partial_cmp(b).expect("finite means"));
    let alpha = (1.0 - confidence) / 2.0;
    let lo_idx = ((resamples as f64) * alpha).floor() as usize;
    let hi_idx = (((resamples as f64) * (1.0 - alpha)).ceil() as usize).min(resamples - 1);
    (means[lo_idx], means[hi_idx])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exact_estimates_have_zero_error() {
        assert_abs_diff_eq!(
            matched_sq_error_deg(&[30.0, 60.0], &[30.0, 60.0]).unwrap(),
            0.0
        );
    }

    #[test]
    fn permutation_matching_absorbs_label_swaps() {
        assert_abs_diff_eq!(
            matched_sq_error_deg(&[60.0, 30.0], &[30.0, 60.0]).unwrap(),
            0.0
        );
    }

    #[test]
    fn one_degree_errors_average_to_one() {
        assert_abs_diff_eq!(
            matched_sq_error_deg(&[31.0, 59.0], &[30.0, 60.0]).unwrap(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn trials_average_matches_hand_computation() {
        let mse = mse_permutation_matched(
            &[vec![31.0, 59.0], vec![30.0, 60.0]],
            &[30.0, 60.0],
        )
        .unwrap();
        assert_abs_diff_eq!(mse, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn mismatched_lengths_error() {
        assert!(matched_sq_error_deg(&[30.0], &[30.0, 60.0]).is_err());
    }

    #[test]
    fn bootstrap_interval_brackets_the_mean_for_constant_data() {
        let (lo, hi) = bootstrap_mean_ci(&[2.0; 50], 200, 0.95, 1);
        assert_abs_diff_eq!(lo, 2.0);
        assert_abs_diff_eq!(hi, 2.0);
    }

    #[test]
    fn bootstrap_is_deterministic_per_seed() {
        let values: Vec<f64> = (0..40).map(|i| (i as f64) * 0.3).collect();
        assert_eq!(
            bootstrap_mean_ci(&values, 500, 0.95, 9),
            bootstrap_mean_ci(&values, 500, 0.95, 9)
        );
    }
}
