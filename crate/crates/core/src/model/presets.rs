//! Reference exponent models from urban LoS small-cell drive tests at LTE 1800
//! and 2600, plus the matching single-slope regression figures.

use serde::{Deserialize, Serialize};

use super::{BandedPleDistribution, FrequencyBand, PathLossModel, PleDistribution, PleSource};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Band {
    Lte1800,
    Lte2600,
}

impl Band {
    pub fn frequency_band(self) -> FrequencyBand {
        match self {
            Band::Lte1800 => FrequencyBand::lte1800(),
            Band::Lte2600 => FrequencyBand::lte2600(),
        }
    }

    pub fn from_mhz(mhz: f64) -> Option<Self> {
        if (mhz - 1800.0).abs() < 0.5 {
            Some(Band::Lte1800)
        } else if (mhz - 2600.0).abs() < 0.5 {
            Some(Band::Lte2600)
        } else {
            None
        }
    }

    /// Exponent of the single-slope regression fit.
    pub fn regression_gamma(self) -> f64 {
        match self {
            Band::Lte1800 => 2.85,
            Band::Lte2600 => 2.52,
        }
    }

    /// Residual standard deviation of the single-slope fit, dB.
    pub fn regression_residual_std_db(self) -> f64 {
        match self {
            Band::Lte1800 => 5.7,
            Band::Lte2600 => 7.1,
        }
    }
}

pub fn near_model(band: Band) -> PleDistribution {
    match band {
        Band::Lte1800 => PleDistribution::gev(-0.31, 0.42, 2.7),
        Band::Lte2600 => PleDistribution::gev(-0.23, 0.93, 2.6),
    }
    .expect("preset parameters are valid")
}

pub fn far_model(band: Band) -> PleDistribution {
    match band {
        Band::Lte1800 => PleDistribution::scaled_beta(3.0, 3.4, 2.2, 3.2),
        Band::Lte2600 => PleDistribution::scaled_beta(21.0, 18.0, 0.0, 5.0),
    }
    .expect("preset parameters are valid")
}

/// GEV below 60 m, scaled Beta beyond.
pub fn reference_banded(band: Band) -> BandedPleDistribution {
    BandedPleDistribution::new(BandedPleDistribution::DEFAULT_BREAKPOINT_M, near_model(band), far_model(band))
        .expect("preset breakpoint is valid")
}

/// Banded model anchored at the band's free-space intercept.
pub fn reference_model(band: Band) -> PathLossModel {
    PathLossModel::free_space_anchored(band.frequency_band(), PleSource::Banded(reference_banded(band)))
}
