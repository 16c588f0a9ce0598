//! Run configuration for `simulate`.

use std::path::{Path, PathBuf};

use expose_core::model::presets::{reference_model, Band};
use expose_core::{
    ModelFile, OccupancyProfile, PathLossModel, RadioConfig, SarTable, ScenarioGeometry, Stratification,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SEED_ENV: &str = "EXPOSE_SIM_SEED";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationSettings {
    /// When set, the throughput efficiency is tuned so the mean upload time
    /// over the run equals this value.
    pub target_mean_ul_time_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub n_observations: usize,
    /// Thread count. Never written to reports: it must not change results.
    #[serde(skip_serializing)]
    pub worker_count: Option<usize>,
    /// Fitted model, relative to the config file. Without it the built-in
    /// reference model for the radio band is used.
    pub model_file: Option<PathBuf>,
    pub geometry: ScenarioGeometry,
    pub radio: RadioConfig,
    pub occupancy: OccupancyProfile,
    pub sar: SarTable,
    pub stratification: Stratification,
    pub calibration: CalibrationSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            n_observations: 100_000,
            worker_count: None,
            model_file: None,
            geometry: ScenarioGeometry::default(),
            radio: RadioConfig::default(),
            occupancy: OccupancyProfile::default(),
            sar: SarTable::default(),
            stratification: Stratification::default(),
            calibration: CalibrationSettings::default(),
        }
    }
}

/// Where the path-loss model came from, as recorded in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum ModelSource {
    Builtin { band_mhz: f64 },
    File { path: String },
}

impl RunConfig {
    pub fn for_band(band: Band) -> Self {
        Self { radio: RadioConfig::small_cell(band.frequency_band()), ..Self::default() }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::data(e).context(format!("reading config {}", path.display())))?;
        Self::from_json(&text).map_err(|e| e.context(format!("config {}", path.display())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.n_observations < 1 {
            return Err(CliError::data(anyhow::anyhow!("n_observations must be at least 1")));
        }
        if self.worker_count == Some(0) {
            return Err(CliError::data(anyhow::anyhow!("worker_count must be at least 1")));
        }
        self.sar.validate()?;
        Ok(())
    }

    /// Loads the model file (resolved against `base_dir`) or falls back to the
    /// built-in model for the configured band.
    pub fn path_loss_model(&self, base_dir: &Path) -> Result<(PathLossModel, ModelSource), CliError> {
        match &self.model_file {
            Some(rel) => {
                let path = if rel.is_absolute() { rel.clone() } else { base_dir.join(rel) };
                let file = ModelFile::load(&path)?;
                let model = file.path_loss_model().map_err(CliError::data)?;
                Ok((model, ModelSource::File { path: rel.display().to_string() }))
            }
            None => {
                let mhz = self.radio.band.carrier_mhz();
                let band = Band::from_mhz(mhz).ok_or_else(|| {
                    CliError::data(anyhow::anyhow!("no built-in model for {mhz} MHz; set model_file"))
                })?;
                Ok((reference_model(band), ModelSource::Builtin { band_mhz: mhz }))
            }
        }
    }
}

/// `--seed` beats the environment variable, which beats the config file.
pub fn resolve_seed(config_seed: u64, env_seed: Option<&str>, flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match env_seed.map(str::trim).filter(|s| !s.is_empty()) {
        Some(s) => s.parse().map_err(|_| CliError::usage(format!("{SEED_ENV}={s} is not an unsigned integer"))),
        None => Ok(config_seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_precedence() {
        assert_eq!(resolve_seed(1, None, None).unwrap(), 1);
        assert_eq!(resolve_seed(1, Some("7"), None).unwrap(), 7);
        assert_eq!(resolve_seed(1, Some("7"), Some(9)).unwrap(), 9);
        assert_eq!(resolve_seed(1, Some(""), None).unwrap(), 1);
        assert!(resolve_seed(1, Some("x"), None).is_err());
    }

    #[test]
    fn empty_object_is_default() {
        assert_eq!(RunConfig::from_json("{}").unwrap(), RunConfig::default());
    }

    #[test]
    fn worker_count_not_serialized() {
        let cfg = RunConfig { worker_count: Some(8), ..RunConfig::default() };
        let text = serde_json::to_string(&cfg).unwrap();
        assert!(!text.contains("worker_count"));
    }

    #[test]
    fn rejects_bad_values() {
        assert!(RunConfig::from_json(r#"{"n_observations": 0}"#).is_err());
        assert!(RunConfig::from_json(r#"{"bogus": 1}"#).is_err());
        assert!(RunConfig::from_json(r#"{"worker_count": 0}"#).is_err());
    }
}
