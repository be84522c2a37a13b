//! Condition-constrained covariance concentration step.
//!
//! The unconstrained covariance maximizer given per-snapshot weights is the
//! weighted residual scatter. With the waveforms fitted by least squares the
//! residuals span at most N - M dimensions, so that scatter is always rank
//! deficient and the conditional likelihood is unbounded along its null
//! space. The update therefore maximizes over the scale-invariant family
//! `{Q : lambda_min(Q) >= ratio * tr(Q) / N}` instead: in the scatter's
//! eigenbasis this is a water-filling problem whose KKT system reduces to a
//! single monotone scalar equation. Healthy eigenvalues are left untouched,
//! so the step coincides with the plain scatter whenever that is well
//! conditioned. An explicit accept check keeps the previous covariance when
//! the candidate would lower the conditional likelihood, which makes each
//! outer iteration a true ascent step.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use crate::array::CMatrix;
use crate::error::{Error, Result};
use crate::noise::SpeckleCovariance;
use crate::numerics::{hermitian_factor, normalize_trace, HermitianFactor};

/// Minimum eigenvalue of the covariance iterate as a fraction of the average
/// eigenvalue tr(Q)/N. Small enough not to distort a well-conditioned speckle
/// estimate, large enough to keep the whitener numerically sane.
pub const Q_CONDITION_FLOOR: f64 = 1e-2;

pub(crate) struct CovarianceStep {
    pub covariance: SpeckleCovariance,
    pub factor: HermitianFactor,
}

/// One covariance refresh: weighted scatter, constrained spectral maximizer,
/// trace normalization, ascent check against the previous iterate.
pub(crate) fn covariance_step(
    residuals: &CMatrix,
    tau_weights: &[f64],
    previous: &SpeckleCovariance,
    previous_factor: &HermitianFactor,
    min_ratio: f64,
) -> Result<CovarianceStep> {
    let n = residuals.nrows();
    let t_count = residuals.ncols();
    if tau_weights.len() != t_count {
        return Err(Error::Dimension(format!(
            "{} weights for {t_count} residual columns",
            tau_weights.len()
        )));
    }
    let mut scatter = CMatrix::zeros(n, n);
    for (t, &tau) in tau_weights.iter().enumerate() {
        if !(tau > 0.0) {
            return Err(Error::Domain("texture weights must be positive".into()));
        }
        let r = residuals.column(t);
        scatter += &r * r.adjoint() * Complex64::from(1.0 / tau);
    }
    scatter /= Complex64::from(t_count as f64);
    scatter = (&scatter + scatter.adjoint()) * Complex64::from(0.5);

    let eig = SymmetricEigen::new(scatter);
    let mu: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
    let spectrum = constrained_spectrum(&mu, t_count as f64, min_ratio);
    let u = &eig.eigenvectors;
    let rebuilt = u
        * nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            n,
            spectrum.iter().map(|&l| Complex64::from(l)),
        ))
        * u.adjoint();
    let candidate = normalize_trace(&SpeckleCovariance::new(
        (&rebuilt + rebuilt.adjoint()) * Complex64::from(0.5),
    )?)?;
    let candidate_factor = hermitian_factor(&candidate)?;

    let fit_candidate = conditional_fit(residuals, tau_weights, &candidate_factor);
    let fit_previous = conditional_fit(residuals, tau_weights, previous_factor);
    let slack = 1e-9 * fit_previous.abs().max(1.0);
    if fit_candidate + slack < fit_previous {
        Ok(CovarianceStep {
            covariance: previous.clone(),
            factor: previous_factor.clone(),
        })
    } else {
        Ok(CovarianceStep {
            covariance: candidate,
            factor: candidate_factor,
        })
    }
}

/// Covariance-dependent part of the conditional log-likelihood at fixed
/// residuals and texture weights: `-T ln|Q| - sum_t r_t^H Q^{-1} r_t / tau_t`.
fn conditional_fit(residuals: &CMatrix, tau_weights: &[f64], factor: &HermitianFactor) -> f64 {
    let whitened = factor.inv_sqrt() * residuals;
    let quad: f64 = tau_weights
        .iter()
        .enumerate()
        .map(|(t, &tau)| whitened.column(t).norm_squared() / tau)
        .sum();
    -(tau_weights.len() as f64) * factor.log_det() - quad
}

/// Eigenvalues maximizing `-T sum ln(lambda_i) - T sum mu_i / lambda_i`
/// subject to `lambda_i >= ratio * sum(lambda) / n`.
///
/// KKT structure: unconstrained directions satisfy
/// `sigma lambda^2 + T lambda - T mu = 0` for a shared multiplier aggregate
/// `sigma >= 0`; constrained directions sit at the common floor `m`, which the
/// trace couples back to the rest. The consistency equation in `sigma` is
/// monotone and solved by bisection.
pub(crate) fn constrained_spectrum(mu: &[f64], t_count: f64, ratio: f64) -> Vec<f64> {
    let n = mu.len();
    let total: f64 = mu.iter().sum();
    if !(total > 0.0) {
        return vec![1.0; n];
    }
    let min = mu.iter().cloned().fold(f64::INFINITY, f64::min);
    if min >= ratio * total / n as f64 {
        return mu.to_vec();
    }
    let assemble = |sigma: f64| -> (f64, Vec<f64>, f64) {
        let unfloored: Vec<f64> = mu.iter().map(|&m| lambda_unconstrained(m, sigma, t_count)).collect();
        let m = water_level(&unfloored, ratio);
        let mut residual = sigma;
        let lam: Vec<f64> = unfloored
            .iter()
            .zip(mu.iter())
            .map(|(&l, &mu_i)| {
                if l <= m {
                    residual -= (ratio / n as f64) * (sigma + t_count / m - t_count * mu_i / (m * m));
                    m
                } else {
                    l
                }
            })
            .collect();
        (residual, lam, m)
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while assemble(hi).0 < 0.0 && hi < 1e18 {
        hi *= 4.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if assemble(mid).0 < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    assemble(0.5 * (lo + hi)).1
}

/// Positive root of `sigma l^2 + T l - T mu = 0`, written to stay stable as
/// sigma -> 0 (where it tends to mu).
fn lambda_unconstrained(mu: f64, sigma: f64, t_count: f64) -> f64 {
    if mu <= 0.0 {
        return 0.0;
    }
    2.0 * mu / (1.0 + (1.0 + 4.0 * sigma * mu / t_count).sqrt())
}

/// Common floor satisfying `m = (ratio/n)(sum of unfloored + k m)` where `k`
/// counts the floored directions; found by scanning the sorted spectrum.
fn water_level(lambdas: &[f64], ratio: f64) -> f64 {
    let n = lambdas.len();
    let mut sorted = lambdas.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
    for k in 0..=n {
        let unfloored_sum: f64 = sorted[..n - k].iter().sum();
        let denom = n as f64 - ratio * k as f64;
        if denom <= 0.0 {
            continue;
        }
        let m = ratio * unfloored_sum / denom;
        let floor_ok = k == 0 || sorted[n - k] <= m;
        let unfloored_ok = k == n || sorted[n - k - 1] > m;
        if floor_ok && unfloored_ok {
            return m;
        }
    }
    ratio * sorted.iter().sum::<f64>() / n as f64
}
