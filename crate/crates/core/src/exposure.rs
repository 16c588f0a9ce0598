//! Exposure Index: population-averaged SAR dose split into the uplink part
//! (own handset) and the downlink part (small-cell field).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::FrequencyBand;
use crate::scenario::{Environment, OccupancyProfile, UserObservation};
use crate::units::{aperture_factor, dbm_to_watts};

#[derive(Debug, Error, PartialEq)]
pub enum ExposureError {
    #[error("no observations to aggregate")]
    Empty,
    #[error("no SAR entry for {band_mhz} MHz / {population} / {posture} / {usage}")]
    MissingSar { band_mhz: f64, population: String, posture: String, usage: String },
    #[error("invalid SAR value {0}")]
    InvalidSar(f64),
}

fn one() -> f64 {
    1.0
}

/// Whole-body SAR per unit transmitted power (uplink) and per unit incident
/// power density (downlink) for one usage case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SarEntry {
    pub band_mhz: f64,
    pub population: String,
    pub posture: String,
    pub usage: String,
    /// W/kg per `reference_tx_power_w` transmitted.
    pub sar_ul: f64,
    /// W/kg per `reference_incident` W/m² incident.
    pub sar_dl: f64,
    #[serde(default = "one")]
    pub reference_tx_power_w: f64,
    #[serde(default = "one")]
    pub reference_incident: f64,
}

impl SarEntry {
    pub fn adult_standing_data(band_mhz: f64, sar_ul: f64, sar_dl: f64) -> Self {
        Self {
            band_mhz,
            population: "adult".into(),
            posture: "standing".into(),
            usage: "data".into(),
            sar_ul,
            sar_dl,
            reference_tx_power_w: 1.0,
            reference_incident: 1.0,
        }
    }

    fn matches(&self, band_mhz: f64, occ: &OccupancyProfile) -> bool {
        (self.band_mhz - band_mhz).abs() < 0.5
            && self.population.eq_ignore_ascii_case(&occ.population)
            && self.posture.eq_ignore_ascii_case(&occ.posture)
            && self.usage.eq_ignore_ascii_case(&occ.usage)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SarTable {
    pub entries: Vec<SarEntry>,
}

impl Default for SarTable {
    /// Adult, standing, data usage at LTE 1800 and 2600.
    fn default() -> Self {
        Self {
            entries: vec![
                SarEntry::adult_standing_data(1800.0, 0.0039, 0.0047),
                SarEntry::adult_standing_data(2600.0, 0.0029, 0.0042),
            ],
        }
    }
}

impl SarTable {
    pub fn validate(&self) -> Result<(), ExposureError> {
        for e in &self.entries {
            for v in [e.sar_ul, e.sar_dl, e.reference_tx_power_w, e.reference_incident] {
                if !(v.is_finite() && v > 0.0) {
                    return Err(ExposureError::InvalidSar(v));
                }
            }
        }
        Ok(())
    }

    pub fn lookup(&self, band_mhz: f64, occ: &OccupancyProfile) -> Result<&SarEntry, ExposureError> {
        self.entries.iter().find(|e| e.matches(band_mhz, occ)).ok_or_else(|| ExposureError::MissingSar {
            band_mhz,
            population: occ.population.clone(),
            posture: occ.posture.clone(),
            usage: occ.usage.clone(),
        })
    }
}

/// `(TD / T) · SAR_UL · P̄_TX / P_ref`.
pub fn uplink_dose(sar: &SarEntry, mean_ul_time_s: f64, period_s: f64, mean_tx_power_w: f64) -> f64 {
    debug_assert!((0.0..=period_s).contains(&mean_ul_time_s));
    mean_ul_time_s / period_s * sar.sar_ul * mean_tx_power_w / sar.reference_tx_power_w
}

/// `fraction · SAR_DL · P̄_rx · 4π/λ² / S_ref`, the received power converted
/// to incident power density through the isotropic aperture.
pub fn downlink_dose(sar: &SarEntry, mean_received_power_w: f64, band: &FrequencyBand, period_fraction: f64) -> f64 {
    period_fraction * sar.sar_dl * mean_received_power_w * aperture_factor(band.carrier_frequency_hz())
        / sar.reference_incident
}

/// Sum with a fixed pairwise tree, so the rounding does not depend on how
/// the input was produced.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stratification {
    #[default]
    Environment,
    Pooled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stratum {
    /// `None` for the pooled population.
    pub environment: Option<Environment>,
    pub band_mhz: f64,
    pub fraction: f64,
    pub n_observations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EiBreakdown {
    pub stratum: Stratum,
    /// Transmit power averaged over upload time, W.
    pub mean_tx_power_w: f64,
    /// Mean received reference-signal power, W.
    pub mean_received_power_w: f64,
    pub mean_incident_density_w_m2: f64,
    pub mean_ul_time_s: f64,
    pub dl_time_s: f64,
    pub sar_ul: f64,
    pub sar_dl: f64,
    pub ul_exposure: f64,
    pub dl_exposure: f64,
    pub ei: f64,
}

impl EiBreakdown {
    pub fn uplink_share(&self) -> f64 {
        if self.ei > 0.0 {
            self.ul_exposure / self.ei
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EiAggregate {
    pub strata: Vec<EiBreakdown>,
    pub overall: EiBreakdown,
}

impl EiAggregate {
    pub fn stratum(&self, env: Environment) -> Option<&EiBreakdown> {
        self.strata.iter().find(|s| s.stratum.environment == Some(env))
    }
}

struct Means {
    tx_w: f64,
    rx_w: f64,
    ul_time_s: f64,
}

fn stratum_means(obs: &[&UserObservation]) -> Means {
    let n = obs.len() as f64;
    let times: Vec<f64> = obs.iter().map(|o| o.ul_time_s).collect();
    let tx: Vec<f64> = obs.iter().map(|o| dbm_to_watts(o.link.uplink_tx_power_dbm)).collect();
    let energy: Vec<f64> = times.iter().zip(&tx).map(|(t, p)| t * p).collect();
    let rx: Vec<f64> = obs.iter().map(|o| o.link.incident_power_w).collect();
    let total_time = pairwise_sum(&times);
    let tx_w = if total_time > 0.0 { pairwise_sum(&energy) / total_time } else { pairwise_sum(&tx) / n };
    Means { tx_w, rx_w: pairwise_sum(&rx) / n, ul_time_s: total_time / n }
}

fn breakdown(stratum: Stratum, m: &Means, sar: &SarEntry, band: &FrequencyBand, period_s: f64) -> EiBreakdown {
    let ul = uplink_dose(sar, m.ul_time_s, period_s, m.tx_w);
    let dl = downlink_dose(sar, m.rx_w, band, 1.0);
    EiBreakdown {
        stratum,
        mean_tx_power_w: m.tx_w,
        mean_received_power_w: m.rx_w,
        mean_incident_density_w_m2: m.rx_w * aperture_factor(band.carrier_frequency_hz()),
        mean_ul_time_s: m.ul_time_s,
        dl_time_s: period_s,
        sar_ul: sar.sar_ul,
        sar_dl: sar.sar_dl,
        ul_exposure: ul,
        dl_exposure: dl,
        ei: ul + dl,
    }
}

/// Per-stratum breakdowns and the fraction-weighted overall index.
///
/// Strata fractions are the empirical shares of the observations. Strata with
/// no observations are left out with a warning.
pub fn aggregate_ei(
    observations: &[UserObservation],
    sar: &SarEntry,
    band: &FrequencyBand,
    occ: &OccupancyProfile,
    strata: Stratification,
) -> Result<EiAggregate, ExposureError> {
    if observations.is_empty() {
        return Err(ExposureError::Empty);
    }
    let n = observations.len();
    let band_mhz = band.carrier_mhz();
    let mut groups: BTreeMap<Option<Environment>, Vec<&UserObservation>> = BTreeMap::new();
    match strata {
        Stratification::Environment => {
            for env in Environment::ALL {
                groups.insert(Some(env), Vec::new());
            }
            for o in observations {
                groups.get_mut(&Some(o.environment)).expect("all environments").push(o);
            }
        }
        Stratification::Pooled => {
            groups.insert(None, observations.iter().collect());
        }
    }

    let mut out = Vec::new();
    for (env, members) in &groups {
        if members.is_empty() {
            log::warn!("stratum {} has no observations, excluded", env.map_or("all", Environment::as_str));
            continue;
        }
        let stratum = Stratum {
            environment: *env,
            band_mhz,
            fraction: members.len() as f64 / n as f64,
            n_observations: members.len(),
        };
        out.push(breakdown(stratum, &stratum_means(members), sar, band, occ.period_s));
    }

    let weighted = |f: fn(&EiBreakdown) -> f64| {
        let terms: Vec<f64> = out.iter().map(|b| b.stratum.fraction * f(b)).collect();
        pairwise_sum(&terms)
    };
    let all: Vec<&UserObservation> = observations.iter().collect();
    let pooled = stratum_means(&all);
    let ul = weighted(|b| b.ul_exposure);
    let dl = weighted(|b| b.dl_exposure);
    let overall = EiBreakdown {
        stratum: Stratum { environment: None, band_mhz, fraction: 1.0, n_observations: n },
        mean_tx_power_w: pooled.tx_w,
        mean_received_power_w: pooled.rx_w,
        mean_incident_density_w_m2: pooled.rx_w * aperture_factor(band.carrier_frequency_hz()),
        mean_ul_time_s: pooled.ul_time_s,
        dl_time_s: occ.period_s,
        sar_ul: sar.sar_ul,
        sar_dl: sar.sar_dl,
        ul_exposure: ul,
        dl_exposure: dl,
        ei: weighted(|b| b.ei),
    };
    Ok(EiAggregate { strata: out, overall })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::link::LinkResult;
    use crate::scenario::Point3;
    use crate::units::watts_to_dbm;
    use proptest::prelude::*;

    fn sar(band: f64) -> SarEntry {
        SarTable::default().lookup(band, &OccupancyProfile::default()).unwrap().clone()
    }

    fn obs(env: Environment, ptx_w: f64, rx_w: f64, t: f64) -> UserObservation {
        UserObservation {
            position: Point3::new(0.0, 0.0, 1.5),
            environment: env,
            distance_3d_m: 10.0,
            gamma: 2.0,
            penetration_loss_db: 0.0,
            link: LinkResult {
                path_loss_db: 80.0,
                rsrp_dbm: watts_to_dbm(rx_w),
                uplink_tx_power_dbm: watts_to_dbm(ptx_w),
                snr_db: 20.0,
                downlink_snr_db: 20.0,
                resource_blocks: 100,
                throughput_bps: 1e7,
                incident_power_w: rx_w,
            },
            ul_time_s: t,
        }
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn uplink_dose_examples() {
        let s = sar(1800.0);
        assert!(rel(uplink_dose(&s, 4.397, 3600.0, 7.2e-3), 3.43e-8) < 0.01);
        assert_eq!(uplink_dose(&s, 0.0, 3600.0, 7.2e-3), 0.0);
        assert_eq!(uplink_dose(&s, 3600.0, 3600.0, 1.0), 0.0039);
    }

    #[test]
    fn downlink_dose_examples() {
        let b26 = FrequencyBand::lte2600();
        let b18 = FrequencyBand::lte1800();
        assert!(rel(downlink_dose(&sar(2600.0), 9.36e-10, &b26, 1.0), 3.71e-9) < 0.01);
        let d18 = downlink_dose(&sar(1800.0), 8.91e-10, &b18, 1.0);
        assert!((d18 - 1.897_095e-9).abs() < 1e-14);
        assert_eq!(downlink_dose(&sar(1800.0), 0.0, &b18, 1.0), 0.0);
    }

    #[test]
    fn missing_sar_entry() {
        let occ = OccupancyProfile { population: "child".into(), ..OccupancyProfile::default() };
        assert!(SarTable::default().lookup(1800.0, &occ).is_err());
        assert!(SarTable::default().lookup(900.0, &OccupancyProfile::default()).is_err());
    }

    #[test]
    fn zero_upload_gives_downlink_only() {
        let band = FrequencyBand::lte2600();
        let s = sar(2600.0);
        let o = [obs(Environment::Outdoor, 0.01, 1e-12, 0.0)];
        let agg = aggregate_ei(&o, &s, &band, &OccupancyProfile::default(), Stratification::Environment).unwrap();
        assert_eq!(agg.strata.len(), 1);
        assert_eq!(agg.overall.ul_exposure, 0.0);
        assert!(rel(agg.overall.ei, downlink_dose(&s, 1e-12, &band, 1.0)) < 1e-12);
    }

    #[test]
    fn equal_strata_fixed_point() {
        let band = FrequencyBand::lte1800();
        let o = [obs(Environment::Outdoor, 0.01, 1e-9, 4.0), obs(Environment::Indoor, 0.01, 1e-9, 4.0)];
        let agg =
            aggregate_ei(&o, &sar(1800.0), &band, &OccupancyProfile::default(), Stratification::Environment).unwrap();
        assert_eq!(agg.strata.len(), 2);
        assert!(rel(agg.overall.ei, agg.strata[0].ei) < 1e-15);
        assert!(rel(agg.strata[0].ei, agg.strata[1].ei) < 1e-15);
    }

    #[test]
    fn energy_weighted_tx_power() {
        let band = FrequencyBand::lte1800();
        let o = [obs(Environment::Outdoor, 0.1, 1e-9, 1.0), obs(Environment::Outdoor, 0.001, 1e-9, 3.0)];
        let agg = aggregate_ei(&o, &sar(1800.0), &band, &OccupancyProfile::default(), Stratification::Pooled).unwrap();
        assert!(rel(agg.overall.mean_tx_power_w, (0.1 + 0.003) / 4.0) < 1e-12);
        assert_eq!(agg.overall.mean_ul_time_s, 2.0);
    }

    #[test]
    fn empty_input() {
        let r = aggregate_ei(
            &[],
            &sar(1800.0),
            &FrequencyBand::lte1800(),
            &OccupancyProfile::default(),
            Stratification::Environment,
        );
        assert_eq!(r, Err(ExposureError::Empty));
    }

    #[test]
    fn pairwise_sum_matches_exact_for_integers() {
        let v: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&v), 500_500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    fn arb_obs() -> impl Strategy<Value = UserObservation> {
        (any::<bool>(), 1e-5..0.2f64, 1e-13..1e-8f64, 0.0..100.0f64).prop_map(|(indoor, p, r, t)| {
            let env = if indoor { Environment::Indoor } else { Environment::Outdoor };
            obs(env, p, r, t)
        })
    }

    proptest! {
        #[test]
        fn additivity(o in prop::collection::vec(arb_obs(), 1..60)) {
            let band = FrequencyBand::lte2600();
            let agg = aggregate_ei(&o, &sar(2600.0), &band, &OccupancyProfile::default(), Stratification::Environment).unwrap();
            let sum: f64 = agg.strata.iter().map(|b| b.stratum.fraction * b.ei).sum();
            prop_assert!(rel(agg.overall.ei, sum) < 1e-12);
            for b in agg.strata.iter().chain([&agg.overall]) {
                prop_assert!(rel(b.ei, b.ul_exposure + b.dl_exposure) < 1e-12);
                prop_assert!(b.ul_exposure >= 0.0 && b.dl_exposure >= 0.0);
                prop_assert!(b.mean_ul_time_s <= b.dl_time_s);
            }
        }

        #[test]
        fn longer_uploads_never_lower_ei(o in prop::collection::vec(arb_obs(), 1..40)) {
            let band = FrequencyBand::lte2600();
            let occ = OccupancyProfile::default();
            let base = aggregate_ei(&o, &sar(2600.0), &band, &occ, Stratification::Environment).unwrap();
            let doubled: Vec<UserObservation> = o
                .iter()
                .map(|x| UserObservation { ul_time_s: (2.0 * x.ul_time_s).min(occ.period_s), ..*x })
                .collect();
            let more = aggregate_ei(&doubled, &sar(2600.0), &band, &occ, Stratification::Environment).unwrap();
            prop_assert!(more.overall.ei >= base.overall.ei * (1.0 - 1e-12));
        }

        #[test]
        fn zero_uplink_sar_leaves_downlink(o in prop::collection::vec(arb_obs(), 1..40)) {
            let band = FrequencyBand::lte1800();
            let mut s = sar(1800.0);
            s.sar_ul = 0.0;
            let agg = aggregate_ei(&o, &s, &band, &OccupancyProfile::default(), Stratification::Environment).unwrap();
            prop_assert_eq!(agg.overall.ul_exposure, 0.0);
            prop_assert!(rel(agg.overall.ei, agg.overall.dl_exposure) < 1e-12);
        }
    }
}
