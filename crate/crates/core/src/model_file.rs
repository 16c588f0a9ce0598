//! On-disk fitted model: banded exponent distributions plus the fit
//! diagnostics and the data that produced them.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fitting::{FitReport, RegressionFit};
use crate::ingest::RejectionTally;
use crate::model::{BandedPleDistribution, FrequencyBand, ModelError, PathLossModel, PleSource};

#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed model file: {0}")]
    Format(#[from] serde_json::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FitProvenance {
    pub input_files: Vec<String>,
    /// Retained path-loss samples per measurement tool.
    pub samples_per_tool: BTreeMap<String, usize>,
    pub rows_read: usize,
    pub rejections: RejectionTally,
    pub missing_power: usize,
    pub too_close: usize,
    pub implausible: usize,
    pub near_points: usize,
    pub far_points: usize,
    pub beta_support_rule: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoodnessOfFit {
    pub near: FitReport,
    pub far: FitReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub band: FrequencyBand,
    pub intercept_db: f64,
    pub exponent: BandedPleDistribution,
    #[serde(default)]
    pub goodness_of_fit: Option<GoodnessOfFit>,
    #[serde(default)]
    pub regression: Option<RegressionFit>,
    #[serde(default)]
    pub provenance: Option<FitProvenance>,
}

impl ModelFile {
    /// Model file without diagnostics, anchored at the free-space intercept.
    pub fn from_banded(band: FrequencyBand, exponent: BandedPleDistribution) -> Self {
        Self {
            band,
            intercept_db: crate::model::free_space_intercept(&band),
            exponent,
            goodness_of_fit: None,
            regression: None,
            provenance: None,
        }
    }

    pub fn path_loss_model(&self) -> Result<PathLossModel, ModelError> {
        PathLossModel::new(self.band, self.intercept_db, PleSource::Banded(self.exponent))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model file serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ModelFileError> {
        let file: ModelFile = serde_json::from_str(text)?;
        file.path_loss_model()?;
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self, ModelFileError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ModelFileError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }
}
