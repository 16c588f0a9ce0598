use expose_core::exposure::{aggregate_ei, SarTable, Stratification};
use expose_core::link::RadioConfig;
use expose_core::model::presets::{reference_model, Band};
use expose_core::scenario::simulate;
use expose_core::units::dbm_to_watts;
use expose_core::{Environment, OccupancyProfile, Scenario, ScenarioGeometry};

fn scenario(band: Band) -> Scenario {
    Scenario {
        geometry: ScenarioGeometry::default(),
        occupancy: OccupancyProfile::default(),
        model: reference_model(band),
        radio: RadioConfig::small_cell(band.frequency_band()),
    }
}

fn ei(s: &Scenario, n: usize, seed: u64) -> expose_core::EiAggregate {
    let obs = simulate(s, n, seed).unwrap();
    let sar = SarTable::default().lookup(s.radio.band.carrier_mhz(), &s.occupancy).unwrap().clone();
    aggregate_ei(&obs, &sar, &s.radio.band, &s.occupancy, Stratification::Environment).unwrap()
}

#[test]
fn same_seed_same_observations() {
    let s = scenario(Band::Lte1800);
    assert_eq!(simulate(&s, 3000, 42).unwrap(), simulate(&s, 3000, 42).unwrap());
    assert_ne!(simulate(&s, 50, 42).unwrap(), simulate(&s, 50, 43).unwrap());
}

#[test]
fn prefix_is_stable_when_n_grows() {
    let s = scenario(Band::Lte2600);
    let short = simulate(&s, 100, 9).unwrap();
    let long = simulate(&s, 1000, 9).unwrap();
    assert_eq!(short[..], long[..100]);
}

#[test]
fn indoor_exposure_dominated_by_uplink() {
    for band in [Band::Lte1800, Band::Lte2600] {
        let agg = ei(&scenario(band), 30_000, 5);
        let indoor = agg.stratum(Environment::Indoor).unwrap();
        let outdoor = agg.stratum(Environment::Outdoor).unwrap();
        assert!(indoor.ei > outdoor.ei);
        assert!(indoor.mean_tx_power_w > outdoor.mean_tx_power_w);
        assert!(outdoor.mean_received_power_w > indoor.mean_received_power_w);
        assert!(agg.overall.uplink_share() > 0.7);
        let sum: f64 = agg.strata.iter().map(|b| b.stratum.fraction * b.ei).sum();
        assert!(((agg.overall.ei - sum) / sum).abs() < 1e-12);
    }
}

#[test]
fn outdoor_received_power_magnitude() {
    let obs = simulate(&scenario(Band::Lte2600), 30_000, 6).unwrap();
    let outdoor: Vec<f64> =
        obs.iter().filter(|o| o.environment == Environment::Outdoor).map(|o| dbm_to_watts(o.link.rsrp_dbm)).collect();
    let mean = outdoor.iter().sum::<f64>() / outdoor.len() as f64;
    assert!(mean > 2.32e-9 / 3.0 && mean < 2.32e-9 * 3.0, "{mean}");
}

#[test]
fn bigger_uploads_raise_exposure() {
    let base = scenario(Band::Lte2600);
    let mut heavy = base.clone();
    heavy.occupancy.upload_volume_bytes *= 2.0;
    assert!(ei(&heavy, 5000, 8).overall.ei > ei(&base, 5000, 8).overall.ei);

    let mut idle = base.clone();
    idle.occupancy.upload_volume_bytes = 0.0;
    let agg = ei(&idle, 5000, 8);
    assert_eq!(agg.overall.ul_exposure, 0.0);
    assert_eq!(agg.overall.ei, agg.overall.dl_exposure);
}

#[test]
fn all_outdoor_population_has_one_stratum() {
    let mut s = scenario(Band::Lte1800);
    s.occupancy.indoor_fraction = 0.0;
    let agg = ei(&s, 2000, 1);
    assert_eq!(agg.strata.len(), 1);
    assert_eq!(agg.strata[0].stratum.environment, Some(Environment::Outdoor));
    assert_eq!(agg.overall.ei, agg.strata[0].ei);
}
