//! The estimator family behind a common trait, registered by name.
//!
//! Built-in strategies: `cmle` (conventional ML under white Gaussian noise),
//! `imle` (iterative ML under SIRP noise) and `imape` (iterative MAP using
//! the texture prior). Harnesses select them at runtime via
//! [`EstimatorRegistry`]; additional strategies can be registered alongside.

use std::collections::BTreeMap;

mod cmle;
mod concentrate;
mod covariance;
mod imape;
mod imle;
mod likelihood;
mod state;
mod updates;

pub use cmle::Cmle;
pub use concentrate::TAU_FLOOR;
pub use covariance::Q_CONDITION_FLOOR;
pub use imape::Imape;
pub use imle::Imle;
pub use likelihood::{conditional_log_likelihood, joint_log_likelihood};
pub use state::{EstimateReport, EstimatorState, StopCriterion};
pub use updates::{
    estimate_a, estimate_b, estimate_tau_map, estimate_tau_ml, estimate_theta,
    estimate_waveforms, residual_quad_form, update_q_map, update_q_ml, ShapeEstimate,
    SHAPE_BRACKET,
};

use crate::array::ArrayGeometry;
use crate::error::{Error, Result};
use crate::noise::TextureKind;
use crate::numerics::GridSpec;
use crate::signal::Snapshots;

/// A direction-of-arrival estimator operating on a snapshot block.
///
/// `seed` feeds any internal randomization (only the MAP variant uses it);
/// estimators must be deterministic given `(snapshots, seed)`.
pub trait DoaEstimator: Send + Sync {
    fn name(&self) -> &'static str;
    fn estimate(&self, snapshots: &Snapshots, seed: u64) -> Result<EstimateReport>;
}

/// Everything needed to instantiate any of the built-in estimators.
#[derive(Debug, Clone)]
pub struct EstimatorOptions {
    pub geometry: ArrayGeometry,
    pub num_sources: usize,
    pub grid: GridSpec,
    pub stop: StopCriterion,
    /// Texture family assumed by the MAP variant; ignored by the others.
    pub texture_kind: Option<TextureKind>,
}

pub type EstimatorBuilder = fn(&EstimatorOptions) -> Result<Box<dyn DoaEstimator>>;

/// Name-keyed estimator factory. Lookups are case-insensitive.
pub struct EstimatorRegistry {
    builders: BTreeMap<String, EstimatorBuilder>,
}

impl EstimatorRegistry {
    pub fn empty() -> Self {
        Self {
            builders: BTreeMap::new(),
        }
    }

    /// Registry with the three built-in strategies.
    pub fn with_builtins() -> Self {
        let mut registry = Self::empty();
        registry.register("cmle", |options| Ok(Box::new(Cmle::new(options)?)));
        registry.register("imle", |options| Ok(Box::new(Imle::new(options)?)));
        registry.register("imape", |options| Ok(Box::new(Imape::new(options)?)));
        registry
    }

    pub fn register(&mut self, name: &str, builder: EstimatorBuilder) {
        self.builders.insert(name.to_ascii_lowercase(), builder);
    }

    pub fn build(
        &self,
        name: &str,
        options: &EstimatorOptions,
    ) -> Result<Box<dyn DoaEstimator>> {
        let key = name.to_ascii_lowercase();
        let builder = self.builders.get(&key).ok_or_else(|| {
            Error::Config(format!(
                "unknown estimator '{name}' (available: {})",
                self.names().join(", ")
            ))
        })?;
        builder(options)
    }

    pub fn names(&self) -> Vec<&str> {
        self.builders.keys().map(String::as_str).collect()
    }
}

impl Default for EstimatorRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}
