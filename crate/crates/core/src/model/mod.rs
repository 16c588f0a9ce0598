//! Deterministic and statistical path-loss model.
//!
//! `PL = A + 10 γ log10(d / d0)` with `d0 = 1 m` and `A` the free-space loss at
//! the reference distance. The exponent γ is either fixed or drawn per link
//! from a distance-banded distribution.

mod distribution;
pub mod presets;

pub use distribution::{Gev, GevParams, PleDistribution, ScaledBeta, ScaledBetaParams, UniformParams, UniformRange};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::units::{wavelength, REFERENCE_DISTANCE_M};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("carrier frequency must be positive, got {0} Hz")]
    NonPositiveFrequency(f64),
    #[error("bandwidth must be positive, got {0} Hz")]
    NonPositiveBandwidth(f64),
    #[error("distance must be positive, got {0} m")]
    NonPositiveDistance(f64),
    #[error("path-loss exponent is undefined at the reference distance")]
    SingularDistance,
    #[error("distance {0} m is inside the reference distance")]
    BelowReferenceDistance(f64),
    #[error("invalid {what}: {value}")]
    InvalidParameter { what: &'static str, value: f64 },
    #[error("invalid support [{lower}, {upper}]")]
    InvalidSupport { lower: f64, upper: f64 },
    #[error("band breakpoint {0} m must exceed the reference distance")]
    InvalidBreakpoint(f64),
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("intercept must be positive, got {0} dB")]
    NonPositiveIntercept(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyBandParams {
    pub carrier_frequency_hz: f64,
    pub bandwidth_hz: f64,
}

/// LTE carrier: center frequency and channel bandwidth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FrequencyBandParams")]
pub struct FrequencyBand {
    carrier_frequency_hz: f64,
    bandwidth_hz: f64,
}

impl TryFrom<FrequencyBandParams> for FrequencyBand {
    type Error = ModelError;

    fn try_from(p: FrequencyBandParams) -> Result<Self, Self::Error> {
        FrequencyBand::new(p.carrier_frequency_hz, p.bandwidth_hz)
    }
}

impl FrequencyBand {
    pub fn new(carrier_frequency_hz: f64, bandwidth_hz: f64) -> Result<Self, ModelError> {
        if !(carrier_frequency_hz.is_finite() && carrier_frequency_hz > 0.0) {
            return Err(ModelError::NonPositiveFrequency(carrier_frequency_hz));
        }
        if !(bandwidth_hz.is_finite() && bandwidth_hz > 0.0) {
            return Err(ModelError::NonPositiveBandwidth(bandwidth_hz));
        }
        Ok(Self { carrier_frequency_hz, bandwidth_hz })
    }

    /// LTE 1800 with a 20 MHz channel.
    pub fn lte1800() -> Self {
        Self { carrier_frequency_hz: 1.8e9, bandwidth_hz: 20e6 }
    }

    /// LTE 2600 with a 15 MHz channel.
    pub fn lte2600() -> Self {
        Self { carrier_frequency_hz: 2.6e9, bandwidth_hz: 15e6 }
    }

    pub fn carrier_frequency_hz(&self) -> f64 {
        self.carrier_frequency_hz
    }

    pub fn bandwidth_hz(&self) -> f64 {
        self.bandwidth_hz
    }

    pub fn carrier_mhz(&self) -> f64 {
        self.carrier_frequency_hz / 1e6
    }

    pub fn wavelength(&self) -> f64 {
        wavelength(self.carrier_frequency_hz)
    }

    /// Uplink resource blocks in a standard LTE channel of this bandwidth.
    pub fn total_resource_blocks(&self) -> Option<u32> {
        const TABLE: [(f64, u32); 6] = [(1.4e6, 6), (3e6, 15), (5e6, 25), (10e6, 50), (15e6, 75), (20e6, 100)];
        TABLE.iter().find(|(bw, _)| (bw - self.bandwidth_hz).abs() < 1e3).map(|&(_, rb)| rb)
    }
}

/// Free-space loss at 1 m, `20 log10(4π/λ)`.
pub fn free_space_intercept(band: &FrequencyBand) -> f64 {
    free_space_intercept_hz(band.carrier_frequency_hz).expect("FrequencyBand guarantees a positive carrier")
}

pub fn free_space_intercept_hz(carrier_frequency_hz: f64) -> Result<f64, ModelError> {
    if !(carrier_frequency_hz.is_finite() && carrier_frequency_hz > 0.0) {
        return Err(ModelError::NonPositiveFrequency(carrier_frequency_hz));
    }
    let lambda = wavelength(carrier_frequency_hz);
    Ok(20.0 * (4.0 * std::f64::consts::PI / lambda).log10())
}

/// Log-distance path loss in dB.
pub fn path_loss(intercept_db: f64, gamma: f64, distance_m: f64) -> Result<f64, ModelError> {
    if !(distance_m > 0.0) {
        return Err(ModelError::NonPositiveDistance(distance_m));
    }
    Ok(intercept_db + 10.0 * gamma * (distance_m / REFERENCE_DISTANCE_M).log10())
}

/// Inverts [`path_loss`] for the exponent at one measurement point.
pub fn extract_ple(path_loss_db: f64, intercept_db: f64, distance_m: f64) -> Result<f64, ModelError> {
    if !(distance_m > 0.0) {
        return Err(ModelError::NonPositiveDistance(distance_m));
    }
    if distance_m == REFERENCE_DISTANCE_M {
        return Err(ModelError::SingularDistance);
    }
    if distance_m < REFERENCE_DISTANCE_M {
        return Err(ModelError::BelowReferenceDistance(distance_m));
    }
    Ok((path_loss_db - intercept_db) / (10.0 * (distance_m / REFERENCE_DISTANCE_M).log10()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandedPleParams {
    pub breakpoint_m: f64,
    pub near: PleDistribution,
    pub far: PleDistribution,
}

/// Two-regime exponent model: `near` below the breakpoint, `far` at or beyond it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BandedPleParams")]
pub struct BandedPleDistribution {
    breakpoint_m: f64,
    near: PleDistribution,
    far: PleDistribution,
}

impl TryFrom<BandedPleParams> for BandedPleDistribution {
    type Error = ModelError;

    fn try_from(p: BandedPleParams) -> Result<Self, Self::Error> {
        BandedPleDistribution::new(p.breakpoint_m, p.near, p.far)
    }
}

impl BandedPleDistribution {
    pub const DEFAULT_BREAKPOINT_M: f64 = 60.0;

    pub fn new(breakpoint_m: f64, near: PleDistribution, far: PleDistribution) -> Result<Self, ModelError> {
        if !(breakpoint_m.is_finite() && breakpoint_m > REFERENCE_DISTANCE_M) {
            return Err(ModelError::InvalidBreakpoint(breakpoint_m));
        }
        Ok(Self { breakpoint_m, near, far })
    }

    pub fn breakpoint_m(&self) -> f64 {
        self.breakpoint_m
    }

    pub fn near(&self) -> &PleDistribution {
        &self.near
    }

    pub fn far(&self) -> &PleDistribution {
        &self.far
    }

    pub fn model_for(&self, distance_m: f64) -> &PleDistribution {
        if distance_m < self.breakpoint_m {
            &self.near
        } else {
            &self.far
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, distance_m: f64, rng: &mut R) -> f64 {
        self.model_for(distance_m).sample(rng)
    }
}

/// Draws an exponent for a link of the given length.
pub fn sample_ple<R: Rng + ?Sized>(
    banded: &BandedPleDistribution,
    distance_m: f64,
    rng: &mut R,
) -> Result<f64, ModelError> {
    if !(distance_m > 0.0) {
        return Err(ModelError::NonPositiveDistance(distance_m));
    }
    Ok(banded.sample(distance_m, rng))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PleSource {
    Fixed { gamma: f64 },
    Banded(BandedPleDistribution),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathLossModelParams {
    pub band: FrequencyBand,
    pub intercept_db: f64,
    pub exponent: PleSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PathLossModelParams")]
pub struct PathLossModel {
    band: FrequencyBand,
    intercept_db: f64,
    exponent: PleSource,
}

impl TryFrom<PathLossModelParams> for PathLossModel {
    type Error = ModelError;

    fn try_from(p: PathLossModelParams) -> Result<Self, Self::Error> {
        PathLossModel::new(p.band, p.intercept_db, p.exponent)
    }
}

impl PathLossModel {
    pub fn new(band: FrequencyBand, intercept_db: f64, exponent: PleSource) -> Result<Self, ModelError> {
        if !(intercept_db.is_finite() && intercept_db > 0.0) {
            return Err(ModelError::NonPositiveIntercept(intercept_db));
        }
        Ok(Self { band, intercept_db, exponent })
    }

    /// Model anchored at the free-space intercept of `band`.
    pub fn free_space_anchored(band: FrequencyBand, exponent: PleSource) -> Self {
        Self { band, intercept_db: free_space_intercept(&band), exponent }
    }

    pub fn band(&self) -> &FrequencyBand {
        &self.band
    }

    pub fn intercept_db(&self) -> f64 {
        self.intercept_db
    }

    pub fn reference_distance_m(&self) -> f64 {
        REFERENCE_DISTANCE_M
    }

    pub fn exponent(&self) -> &PleSource {
        &self.exponent
    }

    pub fn banded(&self) -> Option<&BandedPleDistribution> {
        match &self.exponent {
            PleSource::Banded(b) => Some(b),
            PleSource::Fixed { .. } => None,
        }
    }

    pub fn path_loss(&self, gamma: f64, distance_m: f64) -> Result<f64, ModelError> {
        path_loss(self.intercept_db, gamma, distance_m)
    }

    /// Exponent for a link: the fixed value or a draw from the banded model.
    pub fn draw_gamma<R: Rng + ?Sized>(&self, distance_m: f64, rng: &mut R) -> Result<f64, ModelError> {
        match &self.exponent {
            PleSource::Fixed { gamma } => Ok(*gamma),
            PleSource::Banded(b) => sample_ple(b, distance_m, rng),
        }
    }
}
