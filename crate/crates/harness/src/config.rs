//! Experiment configuration: JSON schema, validation, and resolution into
//! the core library's types. Angles are degrees at this boundary.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use sirpdoa_core::{
    ArrayGeometry, DoaVector, EstimatorOptions, GridSpec, StopCriterion, TextureKind,
    TextureParams,
};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub array: ArrayConfig,
    pub true_doas_deg: Vec<f64>,
    pub snapshots: usize,
    pub noise: NoiseConfig,
    pub snr_grid_db: Vec<f64>,
    pub trials: usize,
    pub estimators: Vec<String>,
    #[serde(default)]
    pub stop: StopConfig,
    #[serde(default)]
    pub grid: GridConfig,
    pub master_seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayConfig {
    pub sensors: usize,
    /// Inter-sensor spacing in half wavelengths.
    #[serde(default = "default_spacing")]
    pub spacing: f64,
}

fn default_spacing() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub texture: TextureKindConfig,
    pub shape_a: f64,
    pub scale_b: f64,
}

/// Texture family; "gamma" gives K-distributed noise, "inverse-gamma" gives
/// t-distributed noise (short aliases "k" and "t" are accepted).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TextureKindConfig {
    #[serde(rename = "gamma", alias = "k", alias = "K")]
    Gamma,
    #[serde(
        rename = "inverse-gamma",
        alias = "inverse_gamma",
        alias = "t",
        alias = "T"
    )]
    InverseGamma,
}

impl From<TextureKindConfig> for TextureKind {
    fn from(value: TextureKindConfig) -> Self {
        match value {
            TextureKindConfig::Gamma => TextureKind::Gamma,
            TextureKindConfig::InverseGamma => TextureKind::InverseGamma,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopConfig {
    pub max_iterations: usize,
    pub theta_tolerance_deg: f64,
}

impl Default for StopConfig {
    fn default() -> Self {
        Self {
            max_iterations: 10,
            theta_tolerance_deg: 1e-4f64.to_degrees(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub lo_deg: f64,
    pub hi_deg: f64,
    pub coarse_step_deg: f64,
    pub refine_tolerance_deg: f64,
    pub min_separation_deg: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            lo_deg: -89.0,
            hi_deg: 89.0,
            coarse_step_deg: 1.0,
            refine_tolerance_deg: 0.01,
            min_separation_deg: 1.0,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// All structural problems, not just the first one.
    pub fn validation_errors(&self) -> Vec<String> {
        let mut errors = Vec::new();
        if self.array.sensors == 0 {
            errors.push("array.sensors must be positive".into());
        }
        if self.array.spacing <= 0.0 {
            errors.push("array.spacing must be positive".into());
        }
        if self.true_doas_deg.is_empty() {
            errors.push("true_doas_deg must be non-empty".into());
        }
        let mut sorted = self.true_doas_deg.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        if sorted.windows(2).any(|w| w[1] <= w[0]) {
            errors.push("true_doas_deg must be distinct".into());
        }
        if self.true_doas_deg.iter().any(|d| d.abs() >= 90.0) {
            errors.push("true_doas_deg must lie strictly inside (-90, 90)".into());
        }
        if self.true_doas_deg.len() >= self.array.sensors {
            errors.push("need fewer sources than sensors".into());
        }
        if self.snapshots == 0 {
            errors.push("snapshots must be positive".into());
        }
        if !(self.noise.shape_a > 0.0) || !(self.noise.scale_b > 0.0) {
            errors.push("noise.shape_a and noise.scale_b must be positive".into());
        }
        if self.noise.texture == TextureKindConfig::InverseGamma && self.noise.shape_a <= 1.0 {
            errors.push(
                "inverse-gamma texture needs shape_a > 1 for a finite mean (SNR definition)"
                    .into(),
            );
        }
        if self.snr_grid_db.is_empty() {
            errors.push("snr_grid_db must be non-empty".into());
        }
        if self.trials == 0 {
            errors.push("trials must be at least 1".into());
        }
        if self.estimators.is_empty() {
            errors.push("estimators must name at least one estimator".into());
        }
        for name in &self.estimators {
            if !["cmle", "imle", "imape"].contains(&name.to_ascii_lowercase().as_str()) {
                errors.push(format!(
                    "unknown estimator '{name}' (available: CMLE, IMLE, IMAPE)"
                ));
            }
        }
        if self.stop.max_iterations == 0 {
            errors.push("stop.max_iterations must be at least 1".into());
        }
        if self.stop.theta_tolerance_deg < 0.0 {
            errors.push("stop.theta_tolerance_deg must be non-negative".into());
        }
        if !(self.grid.lo_deg < self.grid.hi_deg) {
            errors.push("grid.lo_deg must be below grid.hi_deg".into());
        }
        if self.grid.coarse_step_deg <= 0.0
            || self.grid.refine_tolerance_deg <= 0.0
            || self.grid.refine_tolerance_deg >= self.grid.coarse_step_deg
        {
            errors.push("grid refine tolerance must be positive and finer than the step".into());
        }
        if self.grid.min_separation_deg < 0.0 {
            errors.push("grid.min_separation_deg must be non-negative".into());
        }
        if self.grid.lo_deg <= -90.0 || self.grid.hi_deg >= 90.0 {
            errors.push("grid must stay strictly inside (-90, 90) degrees".into());
        }
        errors
    }

    /// Validate and convert into core types.
    pub fn resolve(&self) -> Result<ResolvedExperiment> {
        let errors = self.validation_errors();
        if !errors.is_empty() {
            return Err(HarnessError::Config(errors.join("; ")));
        }
        let positions = (0..self.array.sensors)
            .map(|i| i as f64 * self.array.spacing)
            .collect();
        let geometry = ArrayGeometry::new(positions)?;
        let mut doas = self.true_doas_deg.clone();
        doas.sort_by(|a, b| a.partial_cmp(b).expect("validated finite"));
        let truth = DoaVector::from_degrees(&doas)?;
        let texture = TextureParams::new(
            self.noise.texture.into(),
            self.noise.shape_a,
            self.noise.scale_b,
        )?;
        let grid = GridSpec::new(
            self.grid.lo_deg.to_radians(),
            self.grid.hi_deg.to_radians(),
            self.grid.coarse_step_deg.to_radians(),
            self.grid.refine_tolerance_deg.to_radians(),
            self.grid.min_separation_deg.to_radians(),
        )?;
        let stop = StopCriterion::new(
            self.stop.max_iterations,
            self.stop.theta_tolerance_deg.to_radians(),
        )?;
        let estimator_names: Vec<String> = self
            .estimators
            .iter()
            .map(|n| n.to_ascii_uppercase())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut snr_grid_db = self.snr_grid_db.clone();
        snr_grid_db.sort_by(|a, b| a.partial_cmp(b).expect("validated finite"));
        snr_grid_db.dedup();
        Ok(ResolvedExperiment {
            options: EstimatorOptions {
                geometry: geometry.clone(),
                num_sources: truth.len(),
                grid,
                stop,
                texture_kind: Some(texture.kind()),
            },
            geometry,
            truth_deg: doas,
            truth,
            snapshots: self.snapshots,
            texture,
            snr_grid_db,
            trials: self.trials,
            estimator_names,
            master_seed: self.master_seed,
        })
    }
}

/// Validated configuration in core-library terms.
#[derive(Debug, Clone)]
pub struct ResolvedExperiment {
    pub geometry: ArrayGeometry,
    pub truth: DoaVector,
    pub truth_deg: Vec<f64>,
    pub snapshots: usize,
    pub texture: TextureParams,
    pub snr_grid_db: Vec<f64>,
    pub trials: usize,
    /// Canonical (uppercase, sorted, deduplicated) estimator names.
    pub estimator_names: Vec<String>,
    pub options: EstimatorOptions,
    pub master_seed: u64,
}
