//! Iterative ML estimator: stepwise concentration of the conditional
//! likelihood over textures, speckle covariance, waveforms and angles.

use crate::array::ArrayGeometry;
use crate::error::Result;
use crate::numerics::GridSpec;
use crate::signal::Snapshots;

use super::concentrate::{run_concentration, ConcentrationSetup, Flavor};
use super::state::{EstimateReport, StopCriterion};
use super::{DoaEstimator, EstimatorOptions};

#[derive(Debug, Clone)]
pub struct Imle {
    geometry: ArrayGeometry,
    num_sources: usize,
    grid: GridSpec,
    stop: StopCriterion,
}

impl Imle {
    pub fn new(options: &EstimatorOptions) -> Result<Self> {
        Ok(Self {
            geometry: options.geometry.clone(),
            num_sources: options.num_sources,
            grid: options.grid,
            stop: options.stop,
        })
    }
}

impl DoaEstimator for Imle {
    fn name(&self) -> &'static str {
        "IMLE"
    }

    fn estimate(&self, snapshots: &Snapshots, seed: u64) -> Result<EstimateReport> {
        run_concentration(
            snapshots,
            &ConcentrationSetup {
                geometry: &self.geometry,
                num_sources: self.num_sources,
                grid: &self.grid,
                stop: &self.stop,
                flavor: Flavor::Conditional,
            },
            seed,
        )
    }
}
