//! Iterative MAP estimator: like the iterative ML variant but exploiting the
//! texture prior, with shape and scale refitted from the current textures at
//! every iteration.

use crate::array::ArrayGeometry;
use crate::error::{Error, Result};
use crate::noise::TextureKind;
use crate::numerics::GridSpec;
use crate::signal::Snapshots;

use super::concentrate::{run_concentration, ConcentrationSetup, Flavor};
use super::state::{EstimateReport, StopCriterion};
use super::{DoaEstimator, EstimatorOptions};

#[derive(Debug, Clone)]
pub struct Imape {
    geometry: ArrayGeometry,
    num_sources: usize,
    grid: GridSpec,
    stop: StopCriterion,
    kind: TextureKind,
}

impl Imape {
    pub fn new(options: &EstimatorOptions) -> Result<Self> {
        let kind = options.texture_kind.ok_or_else(|| {
            Error::Config("the posterior estimator needs a texture family".into())
        })?;
        Ok(Self {
            geometry: options.geometry.clone(),
            num_sources: options.num_sources,
            grid: options.grid,
            stop: options.stop,
            kind,
        })
    }
}

impl DoaEstimator for Imape {
    fn name(&self) -> &'static str {
        "IMAPE"
    }

    /// The seed drives the random texture initialization (absolute values of
    /// standard normal draws), so runs are reproducible per seed.
    fn estimate(&self, snapshots: &Snapshots, seed: u64) -> Result<EstimateReport> {
        run_concentration(
            snapshots,
            &ConcentrationSetup {
                geometry: &self.geometry,
                num_sources: self.num_sources,
                grid: &self.grid,
                stop: &self.stop,
                flavor: Flavor::Posterior(self.kind),
            },
            seed,
        )
    }
}
