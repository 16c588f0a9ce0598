//! LTE link budget: downlink RSRP, open-loop uplink power control, SNR,
//! throughput and incident power.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::FrequencyBand;
use crate::units::{aperture_factor, dbm_to_watts, linear_to_db};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinkError {
    #[error("resource block allocation must be at least 1, got {0}")]
    NoResourceBlocks(u32),
    #[error("minimum power {p_min} dBm must be below maximum {p_max} dBm")]
    PowerLimits { p_min: f64, p_max: f64 },
    #[error("path-loss compensation factor {0} outside [0, 1]")]
    Alpha(f64),
    #[error("bandwidth {0} Hz has no standard LTE resource-block count")]
    NonStandardBandwidth(f64),
    #[error("invalid throughput setting: {0}")]
    Throughput(&'static str),
    #[error("invalid resource block policy: {0}")]
    ResourceBlocks(&'static str),
}

/// Attenuated-Shannon throughput map `η · B_alloc · log2(1 + SNR)`, capped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ThroughputModel {
    pub efficiency: f64,
    pub cap_bps: f64,
}

impl Default for ThroughputModel {
    fn default() -> Self {
        Self { efficiency: 0.6, cap_bps: 75e6 }
    }
}

/// Uplink resource blocks granted per upload.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum ResourceBlockPolicy {
    /// Every upload gets the whole channel.
    #[default]
    FullGrant,
    Fixed {
        blocks: u32,
    },
    /// Uniform integer draw in `[min, max]` per observation.
    Uniform {
        min: u32,
        max: u32,
    },
}

/// Small-cell and UE radio parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RadioConfig {
    pub reference_signal_dbm: f64,
    pub sc_gain_db: f64,
    pub ue_gain_db: f64,
    pub thermal_noise_dbm: f64,
    pub p_max_dbm: f64,
    pub p_min_dbm: f64,
    pub p0_dbm: f64,
    pub alpha: f64,
    pub band: FrequencyBand,
    pub throughput: ThroughputModel,
    pub resource_blocks: ResourceBlockPolicy,
    /// Feed total wideband power (RSRP + 10 log10(12 N_RB)) rather than the
    /// per-element RSRP into the downlink SNR.
    pub downlink_snr_wideband: bool,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self::small_cell(FrequencyBand::lte2600())
    }
}

impl RadioConfig {
    /// Small-cell defaults: 10 dBm RS, omni 0 dBi antennas, -101 dBm noise,
    /// UE power in [-40, 23] dBm, P0 = -96 dBm, full compensation.
    pub fn small_cell(band: FrequencyBand) -> Self {
        Self {
            reference_signal_dbm: 10.0,
            sc_gain_db: 0.0,
            ue_gain_db: 0.0,
            thermal_noise_dbm: -101.0,
            p_max_dbm: 23.0,
            p_min_dbm: -40.0,
            p0_dbm: -96.0,
            alpha: 1.0,
            band,
            throughput: ThroughputModel::default(),
            resource_blocks: ResourceBlockPolicy::FullGrant,
            downlink_snr_wideband: true,
        }
    }

    pub fn validate(&self) -> Result<(), LinkError> {
        if !(self.p_min_dbm < self.p_max_dbm) {
            return Err(LinkError::PowerLimits { p_min: self.p_min_dbm, p_max: self.p_max_dbm });
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(LinkError::Alpha(self.alpha));
        }
        if !(self.throughput.efficiency >= 0.0 && self.throughput.efficiency.is_finite()) {
            return Err(LinkError::Throughput("efficiency must be finite and non-negative"));
        }
        if !(self.throughput.cap_bps > 0.0) {
            return Err(LinkError::Throughput("cap must be positive"));
        }
        let total = self.total_resource_blocks()?;
        match self.resource_blocks {
            ResourceBlockPolicy::FullGrant => {}
            ResourceBlockPolicy::Fixed { blocks } => {
                if blocks < 1 || blocks > total {
                    return Err(LinkError::ResourceBlocks("fixed grant outside [1, total]"));
                }
            }
            ResourceBlockPolicy::Uniform { min, max } => {
                if min < 1 || min > max || max > total {
                    return Err(LinkError::ResourceBlocks("uniform range outside [1, total]"));
                }
            }
        }
        Ok(())
    }

    pub fn total_resource_blocks(&self) -> Result<u32, LinkError> {
        self.band.total_resource_blocks().ok_or(LinkError::NonStandardBandwidth(self.band.bandwidth_hz()))
    }
}

/// Link quantities for one user.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkResult {
    pub path_loss_db: f64,
    pub rsrp_dbm: f64,
    pub uplink_tx_power_dbm: f64,
    /// Uplink SNR at the small cell; drives the throughput.
    pub snr_db: f64,
    pub downlink_snr_db: f64,
    pub resource_blocks: u32,
    pub throughput_bps: f64,
    /// Received reference-signal power, W.
    pub incident_power_w: f64,
}

/// `RS + G_sc - PL`.
pub fn downlink_rsrp(cfg: &RadioConfig, path_loss_db: f64) -> f64 {
    cfg.reference_signal_dbm + cfg.sc_gain_db - path_loss_db
}

/// Open-loop power control without the closed-loop corrections, clamped to
/// `[p_min, p_max]`.
pub fn uplink_tx_power(cfg: &RadioConfig, path_loss_db: f64, resource_blocks: u32) -> Result<f64, LinkError> {
    if resource_blocks < 1 {
        return Err(LinkError::NoResourceBlocks(resource_blocks));
    }
    let open_loop = 10.0 * f64::from(resource_blocks).log10() + cfg.p0_dbm + cfg.alpha * path_loss_db;
    Ok(open_loop.min(cfg.p_max_dbm).max(cfg.p_min_dbm))
}

/// Power received at the small cell over thermal noise.
pub fn uplink_snr(cfg: &RadioConfig, tx_power_dbm: f64, path_loss_db: f64) -> f64 {
    tx_power_dbm + cfg.ue_gain_db + cfg.sc_gain_db - path_loss_db - cfg.thermal_noise_dbm
}

/// Downlink received power over thermal noise.
pub fn downlink_snr(cfg: &RadioConfig, rsrp_total_dbm: f64) -> f64 {
    rsrp_total_dbm - cfg.thermal_noise_dbm
}

/// Offset from per-element RSRP to total power over `n_rb` resource blocks.
pub fn rsrp_to_total_offset_db(n_rb: u32) -> f64 {
    linear_to_db(12.0 * f64::from(n_rb))
}

/// Throughput for `resource_blocks` of the channel at the given SNR.
pub fn throughput(cfg: &RadioConfig, snr_db: f64, resource_blocks: u32) -> Result<f64, LinkError> {
    let total = cfg.total_resource_blocks()?;
    let allocated_bw = cfg.band.bandwidth_hz() * f64::from(resource_blocks) / f64::from(total);
    Ok(shannon_throughput(&cfg.throughput, allocated_bw, snr_db))
}

/// `min(cap, η · bandwidth · log2(1 + 10^(snr/10)))`.
pub fn shannon_throughput(model: &ThroughputModel, allocated_bandwidth_hz: f64, snr_db: f64) -> f64 {
    let snr = 10f64.powf(snr_db / 10.0);
    (model.efficiency * allocated_bandwidth_hz * snr.ln_1p() / std::f64::consts::LN_2).min(model.cap_bps).max(0.0)
}

/// Incident power density `P_rx · 4π/λ²` for an isotropic receiver.
pub fn incident_power_density(received_power_w: f64, band: &FrequencyBand) -> f64 {
    received_power_w * aperture_factor(band.carrier_frequency_hz())
}

/// Full link evaluation for a given path loss and grant.
pub fn evaluate_link(cfg: &RadioConfig, path_loss_db: f64, resource_blocks: u32) -> Result<LinkResult, LinkError> {
    let rsrp_dbm = downlink_rsrp(cfg, path_loss_db);
    let tx = uplink_tx_power(cfg, path_loss_db, resource_blocks)?;
    let snr_db = uplink_snr(cfg, tx, path_loss_db);
    let total_rb = cfg.total_resource_blocks()?;
    let dl_power = if cfg.downlink_snr_wideband { rsrp_dbm + rsrp_to_total_offset_db(total_rb) } else { rsrp_dbm };
    Ok(LinkResult {
        path_loss_db,
        rsrp_dbm,
        uplink_tx_power_dbm: tx,
        snr_db,
        downlink_snr_db: downlink_snr(cfg, dl_power),
        resource_blocks,
        throughput_bps: throughput(cfg, snr_db, resource_blocks)?,
        incident_power_w: dbm_to_watts(rsrp_dbm),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg() -> RadioConfig {
        RadioConfig::small_cell(FrequencyBand::lte1800())
    }

    #[test]
    fn rsrp_examples() {
        assert_eq!(downlink_rsrp(&cfg(), 100.0), -90.0);
        assert_eq!(downlink_rsrp(&cfg(), 0.0), 10.0);
    }

    #[test]
    fn uplink_power_examples() {
        let c = cfg();
        assert!((uplink_tx_power(&c, 100.0, 1).unwrap() - 4.0).abs() < 1e-12);
        assert_eq!(uplink_tx_power(&c, 130.0, 1).unwrap(), 23.0);
        let p = uplink_tx_power(&c, 90.0, 50).unwrap();
        assert!((p - 10.989_700_043_360_188).abs() < 1e-12);
        assert_eq!(uplink_tx_power(&c, 10.0, 1).unwrap(), -40.0);
        assert_eq!(uplink_tx_power(&c, 90.0, 0), Err(LinkError::NoResourceBlocks(0)));
    }

    #[test]
    fn snr_examples() {
        let c = cfg();
        assert_eq!(downlink_snr(&c, -81.0), 20.0);
        assert_eq!(downlink_snr(&c, -101.0), 0.0);
        assert_eq!(uplink_snr(&c, 19.0, 100.0), 20.0);
        assert!(uplink_snr(&c, 10.0, 101.0) < uplink_snr(&c, 10.0, 100.0));
    }

    #[test]
    fn throughput_examples() {
        let m = ThroughputModel::default();
        let thr = shannon_throughput(&m, 9e6, 20.0);
        assert!((thr - 35_954_342.006_859_69).abs() < 1e-3);
        assert!(shannon_throughput(&m, 9e6, -400.0) < 1e-30);
        assert_eq!(shannon_throughput(&m, 0.0, 30.0), 0.0);
        assert_eq!(shannon_throughput(&m, 20e6, 60.0), 75e6);
    }

    #[test]
    fn incident_density_examples() {
        let d = incident_power_density(1e-12, &FrequencyBand::lte2600());
        assert!((d - 9.451_813_726_677_119e-10).abs() < 1e-22);
        assert_eq!(incident_power_density(0.0, &FrequencyBand::lte2600()), 0.0);
    }

    #[test]
    fn validation() {
        let mut c = cfg();
        assert!(c.validate().is_ok());
        c.p_min_dbm = 30.0;
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.alpha = 1.2;
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.resource_blocks = ResourceBlockPolicy::Fixed { blocks: 101 };
        assert!(c.validate().is_err());
    }

    #[test]
    fn evaluate_link_is_consistent() {
        let c = cfg();
        let r = evaluate_link(&c, 95.0, 100).unwrap();
        assert_eq!(r.rsrp_dbm, -85.0);
        assert!((r.uplink_tx_power_dbm - 19.0).abs() < 1e-12);
        assert!((r.snr_db - 25.0).abs() < 1e-12);
        assert_eq!(r.throughput_bps, 75e6);
        assert!((r.downlink_snr_db - (-85.0 + 30.791_812_460_476_25 + 101.0)).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn uplink_power_bounded_and_monotone(pl in 0.0f64..200.0, dpl in 0.0f64..20.0, m in 1u32..=100) {
            let c = cfg();
            let p = uplink_tx_power(&c, pl, m).unwrap();
            prop_assert!((-40.0..=23.0).contains(&p));
            prop_assert!(uplink_tx_power(&c, pl + dpl, m).unwrap() >= p);
            prop_assert!(uplink_tx_power(&c, pl, (m + 1).min(100)).unwrap() >= p);
        }

        #[test]
        fn throughput_monotone_in_snr(snr in -30.0f64..40.0, d in 0.0f64..10.0) {
            let c = cfg();
            prop_assert!(throughput(&c, snr + d, 50).unwrap() >= throughput(&c, snr, 50).unwrap());
        }
    }
}
