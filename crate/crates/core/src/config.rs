//! Flat JSON run configuration shared by the command-line tools.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::detection::DetectionConfig;
use crate::error::{Error, Result};
use crate::filter::{DynamicsConfig, Resampler};
use crate::likelihood::LikelihoodParams;
use crate::tracker::TrackerConfig;

/// Environment variable that overrides the configured seed.
pub const SEED_ENV: &str = "DDPF_SEED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub num_particles: usize,
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub init_spread: f64,
    pub resampler: Resampler,
    pub seed: u64,
    pub lambda: f64,
    pub intensity_scale: f64,
    pub hist_levels: u32,
    pub deform_period: usize,
    pub deform_threshold: f64,
    pub deformation_enabled: bool,
    pub gate_px: f64,
    pub bg_frames: usize,
    pub bg_threshold: u8,
    pub min_area: usize,
    pub dilate: bool,
    pub expected_targets: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::from(&TrackerConfig::default())
    }
}

impl From<&TrackerConfig> for RunConfig {
    fn from(c: &TrackerConfig) -> Self {
        Self {
            num_particles: c.num_particles,
            sigma_x: c.dynamics.sigma_x,
            sigma_y: c.dynamics.sigma_y,
            init_spread: c.init_spread,
            resampler: c.resampler,
            seed: c.seed,
            lambda: c.likelihood.lambda,
            intensity_scale: c.likelihood.intensity_scale,
            hist_levels: c.hist_levels,
            deform_period: c.deform_period,
            deform_threshold: c.deform_threshold,
            deformation_enabled: c.deformation_enabled,
            gate_px: c.gate_px,
            bg_frames: c.detection.bg_frames,
            bg_threshold: c.detection.bg_threshold,
            min_area: c.detection.min_area,
            dilate: c.detection.dilate,
            expected_targets: c.expected_targets,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.tracker_config()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Applies `DDPF_SEED` when it is set.
    pub fn apply_env(&mut self) -> Result<()> {
        if let Ok(value) = std::env::var(SEED_ENV) {
            self.seed = value
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{SEED_ENV} must be an unsigned integer, got `{value}`")))?;
        }
        Ok(())
    }

    /// Validated tracker configuration.
    pub fn tracker_config(&self) -> Result<TrackerConfig> {
        let config = TrackerConfig {
            expected_targets: self.expected_targets,
            deformation_enabled: self.deformation_enabled,
            deform_period: self.deform_period,
            deform_threshold: self.deform_threshold,
            num_particles: self.num_particles,
            init_spread: self.init_spread,
            dynamics: DynamicsConfig {
                sigma_x: self.sigma_x,
                sigma_y: self.sigma_y,
            },
            resampler: self.resampler,
            seed: self.seed,
            likelihood: LikelihoodParams {
                lambda: self.lambda,
                intensity_scale: self.intensity_scale,
            },
            hist_levels: self.hist_levels,
            detection: DetectionConfig {
                bg_frames: self.bg_frames,
                bg_threshold: self.bg_threshold,
                min_area: self.min_area,
                dilate: self.dilate,
            },
            gate_px: self.gate_px,
        };
        config.validate()?;
        Ok(config)
    }
}
