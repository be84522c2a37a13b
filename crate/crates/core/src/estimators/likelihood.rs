//! Conditional and joint log-likelihood evaluators.

use crate::array::{steering_matrix, ArrayGeometry, DoaVector};
use crate::error::{Error, Result};
use crate::noise::{TextureKind, TextureParams};
use crate::numerics::special::ln_gamma;
use crate::numerics::HermitianFactor;
use crate::signal::{Snapshots, SourceWaveforms};

/// Conditional log-likelihood of the block given the texture realizations:
///
/// `L_C = -T N ln(pi) - T ln|Q| - N sum_t ln(tau_t) - sum_t rho_t^H rho_t / tau_t`
///
/// with `rho_t = Q^{-1/2} (x_t - A s_t)`.
pub fn conditional_log_likelihood(
    snapshots: &Snapshots,
    geometry: &ArrayGeometry,
    theta: &DoaVector,
    waveforms: &SourceWaveforms,
    factor: &HermitianFactor,
    taus: &[f64],
) -> Result<f64> {
    let n = snapshots.sensors() as f64;
    let t_count = snapshots.num_snapshots();
    if waveforms.num_snapshots() != t_count || taus.len() != t_count {
        return Err(Error::Dimension(format!(
            "block has {t_count} snapshots, waveforms {} and taus {}",
            waveforms.num_snapshots(),
            taus.len()
        )));
    }
    if taus.iter().any(|&tau| !(tau > 0.0)) {
        return Err(Error::Domain("texture values must be positive".into()));
    }
    let a = steering_matrix(geometry, theta)?;
    let residuals = snapshots.matrix() - &a * waveforms.matrix();
    let whitened = factor.inv_sqrt() * residuals;
    let mut ll = -(t_count as f64) * n * std::f64::consts::PI.ln()
        - (t_count as f64) * factor.log_det();
    for (t, &tau) in taus.iter().enumerate() {
        ll -= n * tau.ln();
        ll -= whitened.column(t).norm_squared() / tau;
    }
    Ok(ll)
}

/// Joint log-likelihood: the conditional term plus the texture prior,
/// expanded per texture family.
pub fn joint_log_likelihood(
    snapshots: &Snapshots,
    geometry: &ArrayGeometry,
    theta: &DoaVector,
    waveforms: &SourceWaveforms,
    factor: &HermitianFactor,
    taus: &[f64],
    params: &TextureParams,
) -> Result<f64> {
    let conditional =
        conditional_log_likelihood(snapshots, geometry, theta, waveforms, factor, taus)?;
    let t_count = taus.len() as f64;
    let (a, b) = (params.shape(), params.scale());
    let sum_ln: f64 = taus.iter().map(|tau| tau.ln()).sum();
    let prior = match params.kind() {
        TextureKind::Gamma => {
            let sum: f64 = taus.iter().sum();
            -t_count * ln_gamma(a) - t_count * a * b.ln() + (a - 1.0) * sum_ln - sum / b
        }
        TextureKind::InverseGamma => {
            let sum_inv: f64 = taus.iter().map(|tau| 1.0 / tau).sum();
            -t_count * ln_gamma(a) + t_count * a * b.ln() - (a + 1.0) * sum_ln - b * sum_inv
        }
    };
    Ok(conditional + prior)
}
