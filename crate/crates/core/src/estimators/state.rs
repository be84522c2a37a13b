//! Per-iteration estimator state and the report returned to callers.

use crate::array::DoaVector;
use crate::error::{Error, Result};
use crate::noise::SpeckleCovariance;
use crate::signal::SourceWaveforms;

/// Everything an iteration holds: the angle estimate, the waveform fit, the
/// trace-normalized speckle covariance, the texture estimates, and (for the
/// posterior variant) the fitted texture shape/scale.
#[derive(Debug, Clone)]
pub struct EstimatorState {
    pub iteration: usize,
    pub theta: DoaVector,
    pub waveforms: SourceWaveforms,
    pub q_normalized: SpeckleCovariance,
    pub taus: Vec<f64>,
    pub shape_a: Option<f64>,
    pub scale_b: Option<f64>,
}

/// Iteration stop rule: hard cap plus an absolute angle-change tolerance.
/// A tolerance of zero disables early convergence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopCriterion {
    pub max_iterations: usize,
    pub theta_tolerance_rad: f64,
}

impl StopCriterion {
    pub fn new(max_iterations: usize, theta_tolerance_rad: f64) -> Result<Self> {
        if max_iterations == 0 {
            return Err(Error::Config("need at least one iteration".into()));
        }
        if !(theta_tolerance_rad >= 0.0) {
            return Err(Error::Config(
                "angle tolerance must be non-negative".into(),
            ));
        }
        Ok(Self {
            max_iterations,
            theta_tolerance_rad,
        })
    }
}

impl Default for StopCriterion {
    fn default() -> Self {
        Self {
            max_iterations: 10,
            theta_tolerance_rad: 1e-4,
        }
    }
}

/// Final state plus per-iteration traces. Trace lengths equal
/// `iterations_used`; entry `i` reflects the bundle iteration `i` worked with.
#[derive(Debug, Clone)]
pub struct EstimateReport {
    pub final_state: EstimatorState,
    pub theta_trace: Vec<DoaVector>,
    pub ll_trace: Vec<f64>,
    pub iterations_used: usize,
    /// A texture estimate hit the numerical floor at least once.
    pub tau_floored: bool,
    /// The shape-parameter root left its bracket and was clamped.
    pub shape_clamped: bool,
}

impl EstimateReport {
    pub fn theta(&self) -> &DoaVector {
        &self.final_state.theta
    }

    pub fn theta_degrees(&self) -> Vec<f64> {
        self.final_state.theta.to_degrees()
    }
}
