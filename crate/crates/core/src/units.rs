//! Power-unit conversions and physical constants shared across the crate.

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Reference distance of the log-distance model, meters.
pub const REFERENCE_DISTANCE_M: f64 = 1.0;

#[inline]
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

#[inline]
pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[inline]
pub fn linear_to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

/// Wavelength in meters for a carrier frequency in hertz.
#[inline]
pub fn wavelength(carrier_frequency_hz: f64) -> f64 {
    SPEED_OF_LIGHT / carrier_frequency_hz
}

/// Effective-aperture factor `4π/λ²` (m⁻²) of an isotropic antenna.
#[inline]
pub fn aperture_factor(carrier_frequency_hz: f64) -> f64 {
    let lambda = wavelength(carrier_frequency_hz);
    4.0 * std::f64::consts::PI / (lambda * lambda)
}
