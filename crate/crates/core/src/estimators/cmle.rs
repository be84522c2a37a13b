//! Conventional ML estimator: uniform white Gaussian noise assumption.

use crate::array::ArrayGeometry;
use crate::error::Result;
use crate::noise::SpeckleCovariance;
use crate::numerics::{hermitian_factor, GridSpec};
use crate::signal::Snapshots;

use super::likelihood::conditional_log_likelihood;
use super::state::{EstimateReport, EstimatorState};
use super::updates::{estimate_theta, estimate_waveforms};
use super::{DoaEstimator, EstimatorOptions};

/// Single-shot projection-residual minimizer with unit textures and identity
/// covariance. Matches the iterative conditional estimator's very first
/// angle step operation for operation, so the two agree bit for bit there.
#[derive(Debug, Clone)]
pub struct Cmle {
    geometry: ArrayGeometry,
    num_sources: usize,
    grid: GridSpec,
}

impl Cmle {
    pub fn new(options: &EstimatorOptions) -> Result<Self> {
        Ok(Self {
            geometry: options.geometry.clone(),
            num_sources: options.num_sources,
            grid: options.grid,
        })
    }
}

impl DoaEstimator for Cmle {
    fn name(&self) -> &'static str {
        "CMLE"
    }

    fn estimate(&self, snapshots: &Snapshots, _seed: u64) -> Result<EstimateReport> {
        let taus = vec![1.0; snapshots.num_snapshots()];
        let covariance = SpeckleCovariance::identity(snapshots.sensors());
        let factor = hermitian_factor(&covariance)?;
        let theta = estimate_theta(
            snapshots,
            &self.geometry,
            &taus,
            &factor,
            self.num_sources,
            &self.grid,
            None,
        )?;
        let waveforms = estimate_waveforms(snapshots, &self.geometry, &theta, &factor)?;
        let ll = conditional_log_likelihood(
            snapshots,
            &self.geometry,
            &theta,
            &waveforms,
            &factor,
            &taus,
        )?;
        Ok(EstimateReport {
            final_state: EstimatorState {
                iteration: 0,
                theta: theta.clone(),
                waveforms,
                q_normalized: covariance,
                taus,
                shape_a: None,
                scale_b: None,
            },
            theta_trace: vec![theta],
            ll_trace: vec![ll],
            iterations_used: 1,
            tau_floored: false,
            shape_clamped: false,
        })
    }
}
