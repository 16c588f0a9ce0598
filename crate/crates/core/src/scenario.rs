//! Street-canyon Monte Carlo population around a single small cell.
//!
//! Users stand in a straight street or inside the building slabs lining it.
//! Each observation draws a position, an exponent from the banded model at the
//! 3D distance, an optional wall penetration loss, and runs the link budget.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::link::{evaluate_link, LinkError, LinkResult, RadioConfig, ResourceBlockPolicy};
use crate::model::{ModelError, PathLossModel, UniformRange};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid geometry: {0}")]
    Geometry(&'static str),
    #[error("invalid occupancy: {0}")]
    Occupancy(&'static str),
    #[error("path-loss model carrier {model_hz} Hz differs from radio carrier {radio_hz} Hz")]
    BandMismatch { model_hz: f64, radio_hz: f64 },
    #[error("calibration target {0} s is not reachable")]
    Unreachable(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Link(#[from] LinkError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn distance(&self, other: &Point3) -> f64 {
        let (dx, dy, dz) = (self.x - other.x, self.y - other.y, self.z - other.z);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }
}

/// Street along the x axis centred on the origin, buildings on both sides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioGeometry {
    pub street_length_m: f64,
    pub street_width_m: f64,
    /// Depth of the occupied building slab behind each facade.
    pub penetration_depth_m: f64,
    pub floors: u32,
    pub floor_height_m: f64,
    pub ue_height_m: f64,
    pub sc_position: Point3,
}

impl Default for ScenarioGeometry {
    fn default() -> Self {
        Self {
            street_length_m: 400.0,
            street_width_m: 8.0,
            penetration_depth_m: 6.0,
            floors: 4,
            floor_height_m: 3.0,
            ue_height_m: 1.5,
            sc_position: Point3::new(0.0, 0.0, 3.0),
        }
    }
}

impl ScenarioGeometry {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let lengths = [
            self.street_length_m,
            self.street_width_m,
            self.penetration_depth_m,
            self.floor_height_m,
            self.ue_height_m,
        ];
        if lengths.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(ScenarioError::Geometry("lengths must be positive"));
        }
        if self.floors == 0 {
            return Err(ScenarioError::Geometry("at least one floor"));
        }
        if self.ue_height_m >= self.floor_height_m {
            return Err(ScenarioError::Geometry("UE height must be below the floor height"));
        }
        let sc = self.sc_position;
        if !(sc.x.abs() <= self.street_length_m / 2.0
            && sc.y.abs() <= self.street_width_m / 2.0
            && sc.z.is_finite()
            && sc.z >= 0.0)
        {
            return Err(ScenarioError::Geometry("small cell outside the street footprint"));
        }
        if sc.z == self.ue_height_m {
            return Err(ScenarioError::Geometry("small cell at UE height allows zero distance"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Environment {
    Indoor,
    Outdoor,
}

impl Environment {
    pub const ALL: [Environment; 2] = [Environment::Indoor, Environment::Outdoor];

    pub fn as_str(self) -> &'static str {
        match self {
            Environment::Indoor => "indoor",
            Environment::Outdoor => "outdoor",
        }
    }
}

/// Who the users are and how much they upload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OccupancyProfile {
    pub indoor_fraction: f64,
    pub penetration_loss_db: UniformRange,
    pub population: String,
    pub posture: String,
    pub usage: String,
    pub upload_volume_bytes: f64,
    pub period_s: f64,
}

impl Default for OccupancyProfile {
    fn default() -> Self {
        Self {
            indoor_fraction: 0.7,
            penetration_loss_db: UniformRange::new(7.0, 13.0).expect("valid range"),
            population: "adult".into(),
            posture: "standing".into(),
            usage: "data".into(),
            upload_volume_bytes: 4.16e6,
            period_s: 3600.0,
        }
    }
}

impl OccupancyProfile {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !(0.0..=1.0).contains(&self.indoor_fraction) {
            return Err(ScenarioError::Occupancy("indoor fraction outside [0, 1]"));
        }
        if self.penetration_loss_db.lo() < 0.0 {
            return Err(ScenarioError::Occupancy("negative penetration loss"));
        }
        if !(self.upload_volume_bytes >= 0.0 && self.upload_volume_bytes.is_finite()) {
            return Err(ScenarioError::Occupancy("upload volume must be finite and non-negative"));
        }
        if !(self.period_s > 0.0 && self.period_s.is_finite()) {
            return Err(ScenarioError::Occupancy("period must be positive"));
        }
        Ok(())
    }
}

/// Placement part of an observation, before any radio quantity is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserPlacement {
    pub position: Point3,
    pub environment: Environment,
    pub penetration_loss_db: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserObservation {
    pub position: Point3,
    pub environment: Environment,
    pub distance_3d_m: f64,
    pub gamma: f64,
    pub penetration_loss_db: f64,
    pub link: LinkResult,
    /// Time spent uploading within the period.
    pub ul_time_s: f64,
}

/// Everything needed to evaluate one observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub geometry: ScenarioGeometry,
    pub occupancy: OccupancyProfile,
    pub model: PathLossModel,
    pub radio: RadioConfig,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.geometry.validate()?;
        self.occupancy.validate()?;
        self.radio.validate()?;
        let model_hz = self.model.band().carrier_frequency_hz();
        let radio_hz = self.radio.band.carrier_frequency_hz();
        if (model_hz - radio_hz).abs() > 1e-6 * radio_hz {
            return Err(ScenarioError::BandMismatch { model_hz, radio_hz });
        }
        Ok(())
    }
}

pub fn sample_user<R: Rng + ?Sized>(geom: &ScenarioGeometry, occ: &OccupancyProfile, rng: &mut R) -> UserPlacement {
    let indoor = rng.random::<f64>() < occ.indoor_fraction;
    let half_len = geom.street_length_m / 2.0;
    let half_width = geom.street_width_m / 2.0;
    let x = rng.random_range(-half_len..=half_len);
    if indoor {
        let side = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let y = side * rng.random_range(half_width..=half_width + geom.penetration_depth_m);
        let floor = rng.random_range(0..geom.floors);
        let z = f64::from(floor) * geom.floor_height_m + geom.ue_height_m;
        let lo = occ.penetration_loss_db.lo();
        let hi = occ.penetration_loss_db.hi();
        UserPlacement {
            position: Point3::new(x, y, z),
            environment: Environment::Indoor,
            penetration_loss_db: rng.random_range(lo..=hi),
        }
    } else {
        UserPlacement {
            position: Point3::new(x, rng.random_range(-half_width..=half_width), geom.ue_height_m),
            environment: Environment::Outdoor,
            penetration_loss_db: 0.0,
        }
    }
}

fn draw_resource_blocks<R: Rng + ?Sized>(cfg: &RadioConfig, rng: &mut R) -> Result<u32, LinkError> {
    Ok(match cfg.resource_blocks {
        ResourceBlockPolicy::FullGrant => cfg.total_resource_blocks()?,
        ResourceBlockPolicy::Fixed { blocks } => blocks,
        ResourceBlockPolicy::Uniform { min, max } => rng.random_range(min..=max),
    })
}

/// Seconds needed to push `volume_bytes` at `throughput_bps`, capped at the period.
pub fn upload_time(volume_bytes: f64, throughput_bps: f64, period_s: f64) -> f64 {
    if volume_bytes <= 0.0 {
        return 0.0;
    }
    if !(throughput_bps > 0.0) {
        return period_s;
    }
    (volume_bytes * 8.0 / throughput_bps).min(period_s)
}

pub fn evaluate_observation<R: Rng + ?Sized>(
    placement: UserPlacement,
    scenario: &Scenario,
    rng: &mut R,
) -> Result<UserObservation, ScenarioError> {
    let distance = placement.position.distance(&scenario.geometry.sc_position);
    let gamma = scenario.model.draw_gamma(distance, rng)?;
    let pl = scenario.model.path_loss(gamma, distance)? + placement.penetration_loss_db;
    let blocks = draw_resource_blocks(&scenario.radio, rng)?;
    let link = evaluate_link(&scenario.radio, pl, blocks)?;
    let occ = &scenario.occupancy;
    Ok(UserObservation {
        position: placement.position,
        environment: placement.environment,
        distance_3d_m: distance,
        gamma,
        penetration_loss_db: placement.penetration_loss_db,
        link,
        ul_time_s: upload_time(occ.upload_volume_bytes, link.throughput_bps, occ.period_s),
    })
}

/// Random stream for observation `index`: independent of scheduling.
pub fn observation_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Runs `n` observations on the current rayon pool. The result depends only
/// on `(scenario, n, seed)`.
pub fn simulate(scenario: &Scenario, n: usize, seed: u64) -> Result<Vec<UserObservation>, ScenarioError> {
    scenario.validate()?;
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = observation_rng(seed, i);
            let placement = sample_user(&scenario.geometry, &scenario.occupancy, &mut rng);
            evaluate_observation(placement, scenario, &mut rng)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub target_mean_ul_time_s: f64,
    pub efficiency: f64,
    pub achieved_mean_ul_time_s: f64,
    pub iterations: u32,
}

/// Finds the throughput efficiency whose mean upload time over the scenario
/// matches `target_s`, by bisection on `ln η`.
///
/// Random draws do not depend on the efficiency, so one uncapped pass gives
/// every observation's raw Shannon rate and the search runs on those.
pub fn calibrate_efficiency(
    scenario: &Scenario,
    n: usize,
    seed: u64,
    target_s: f64,
) -> Result<Calibration, ScenarioError> {
    let occ = &scenario.occupancy;
    if !(target_s > 0.0 && target_s < occ.period_s) || occ.upload_volume_bytes <= 0.0 || n == 0 {
        return Err(ScenarioError::Unreachable(target_s));
    }
    let mut raw = scenario.clone();
    raw.radio.throughput.efficiency = 1.0;
    raw.radio.throughput.cap_bps = f64::INFINITY;
    let rates: Vec<f64> = simulate(&raw, n, seed)?.iter().map(|o| o.link.throughput_bps).collect();
    let cap = scenario.radio.throughput.cap_bps;
    let mean_time = |eta: f64| {
        let times: Vec<f64> =
            rates.iter().map(|r| upload_time(occ.upload_volume_bytes, (eta * r).min(cap), occ.period_s)).collect();
        crate::exposure::pairwise_sum(&times) / times.len() as f64
    };

    let (mut lo, mut hi) = (1e-6_f64.ln(), 1e3_f64.ln());
    if mean_time(lo.exp()) < target_s || mean_time(hi.exp()) > target_s {
        return Err(ScenarioError::Unreachable(target_s));
    }
    let mut iterations = 0;
    while hi - lo > 1e-12 && iterations < 200 {
        let mid = 0.5 * (lo + hi);
        if mean_time(mid.exp()) > target_s {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let efficiency = (0.5 * (lo + hi)).exp();
    Ok(Calibration {
        target_mean_ul_time_s: target_s,
        efficiency,
        achieved_mean_ul_time_s: mean_time(efficiency),
        iterations,
    })
}

/// Flat per-observation record, one CSV row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservationRow {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub env: Environment,
    pub d: f64,
    pub gamma: f64,
    pub penetration_db: f64,
    pub pl_db: f64,
    pub rsrp_dbm: f64,
    pub ptx_dbm: f64,
    pub snr_db: f64,
    pub thr_bps: f64,
    pub t_ul_s: f64,
}

impl From<&UserObservation> for ObservationRow {
    fn from(o: &UserObservation) -> Self {
        Self {
            x: o.position.x,
            y: o.position.y,
            z: o.position.z,
            env: o.environment,
            d: o.distance_3d_m,
            gamma: o.gamma,
            penetration_db: o.penetration_loss_db,
            pl_db: o.link.path_loss_db,
            rsrp_dbm: o.link.rsrp_dbm,
            ptx_dbm: o.link.uplink_tx_power_dbm,
            snr_db: o.link.snr_db,
            thr_bps: o.link.throughput_bps,
            t_ul_s: o.ul_time_s,
        }
    }
}

pub const OBSERVATION_HEADER: [&str; 13] = [
    "x",
    "y",
    "z",
    "env",
    "d",
    "gamma",
    "penetration_db",
    "pl_db",
    "rsrp_dbm",
    "ptx_dbm",
    "snr_db",
    "thr_bps",
    "t_ul_s",
];

pub fn write_observations<W: Write>(observations: &[UserObservation], output: W) -> Result<(), ScenarioError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(output);
    w.write_record(OBSERVATION_HEADER)?;
    for o in observations {
        w.serialize(ObservationRow::from(o))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_observations<R: Read>(input: R) -> Result<Vec<ObservationRow>, ScenarioError> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::presets::{reference_model, Band};

    fn scenario(band: Band) -> Scenario {
        Scenario {
            geometry: ScenarioGeometry::default(),
            occupancy: OccupancyProfile::default(),
            model: reference_model(band),
            radio: RadioConfig::small_cell(band.frequency_band()),
        }
    }

    #[test]
    fn occupancy_statistics() {
        let geom = ScenarioGeometry::default();
        let occ = OccupancyProfile::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws: Vec<UserPlacement> = (0..100_000).map(|_| sample_user(&geom, &occ, &mut rng)).collect();
        let indoor: Vec<f64> =
            draws.iter().filter(|p| p.environment == Environment::Indoor).map(|p| p.penetration_loss_db).collect();
        let share = indoor.len() as f64 / draws.len() as f64;
        assert!((share - 0.7).abs() < 0.005, "{share}");
        let mean = indoor.iter().sum::<f64>() / indoor.len() as f64;
        assert!((mean - 10.0).abs() < 0.02, "{mean}");
        for p in &draws {
            match p.environment {
                Environment::Outdoor => {
                    assert_eq!(p.position.z, 1.5);
                    assert!(p.position.y.abs() <= 4.0);
                    assert_eq!(p.penetration_loss_db, 0.0);
                }
                Environment::Indoor => {
                    assert!((4.0..=10.0).contains(&p.position.y.abs()));
                    assert!((7.0..=13.0).contains(&p.penetration_loss_db));
                    let floor = (p.position.z - 1.5) / 3.0;
                    assert!(floor.fract() == 0.0 && (0.0..4.0).contains(&floor));
                }
            }
            assert!(p.position.x.abs() <= 200.0);
        }
    }

    #[test]
    fn distances_respect_geometry() {
        let s = scenario(Band::Lte2600);
        let obs = simulate(&s, 5000, 3).unwrap();
        let max = (200f64.powi(2) + 10f64.powi(2) + 7.5f64.powi(2)).sqrt();
        for o in &obs {
            assert!(o.distance_3d_m >= 1.5 && o.distance_3d_m <= max);
            assert!(o.ul_time_s >= 0.0 && o.ul_time_s <= 3600.0);
        }
    }

    #[test]
    fn boundary_distance_uses_far_model() {
        let mut s = scenario(Band::Lte1800);
        s.geometry.sc_position = Point3::new(0.0, 0.0, 1.5);
        let placement = UserPlacement {
            position: Point3::new(60.0, 0.0, 1.5),
            environment: Environment::Outdoor,
            penetration_loss_db: 0.0,
        };
        for seed in 0..200 {
            let o = evaluate_observation(placement, &s, &mut observation_rng(seed, 0)).unwrap();
            assert_eq!(o.distance_3d_m, 60.0);
            assert!((2.2..=3.2).contains(&o.gamma), "{}", o.gamma);
        }
    }

    #[test]
    fn penetration_adds_to_path_loss() {
        let s = scenario(Band::Lte2600);
        let position = Point3::new(30.0, 5.0, 1.5);
        let outdoor = UserPlacement { position, environment: Environment::Outdoor, penetration_loss_db: 0.0 };
        let indoor = UserPlacement { environment: Environment::Indoor, penetration_loss_db: 9.25, ..outdoor };
        let a = evaluate_observation(outdoor, &s, &mut observation_rng(5, 5)).unwrap();
        let b = evaluate_observation(indoor, &s, &mut observation_rng(5, 5)).unwrap();
        assert_eq!(a.gamma, b.gamma);
        assert!(b.link.path_loss_db > a.link.path_loss_db);
        assert!((b.link.path_loss_db - a.link.path_loss_db - 9.25).abs() < 1e-9);
    }

    #[test]
    fn simulation_independent_of_pool_size() {
        let s = scenario(Band::Lte2600);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| simulate(&s, 2000, 99).unwrap())
        };
        assert_eq!(run(1), run(7));
    }

    #[test]
    fn indoor_users_transmit_harder() {
        let s = scenario(Band::Lte2600);
        let obs = simulate(&s, 20_000, 1).unwrap();
        let mean = |env| {
            let v: Vec<f64> = obs
                .iter()
                .filter(|o| o.environment == env)
                .map(|o| crate::units::dbm_to_watts(o.link.uplink_tx_power_dbm))
                .collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        assert!(mean(Environment::Indoor) > mean(Environment::Outdoor));
    }

    #[test]
    fn calibration_hits_target() {
        let s = scenario(Band::Lte2600);
        let c = calibrate_efficiency(&s, 3000, 4, 4.4).unwrap();
        assert!((c.achieved_mean_ul_time_s - 4.4).abs() < 1e-6);
        let mut calibrated = s.clone();
        calibrated.radio.throughput.efficiency = c.efficiency;
        let obs = simulate(&calibrated, 3000, 4).unwrap();
        let mean = obs.iter().map(|o| o.ul_time_s).sum::<f64>() / obs.len() as f64;
        assert!((mean - 4.4).abs() < 1e-6, "{mean}");
        assert!(calibrate_efficiency(&s, 100, 4, 3600.0).is_err());
    }

    #[test]
    fn upload_time_edges() {
        assert_eq!(upload_time(0.0, 0.0, 3600.0), 0.0);
        assert_eq!(upload_time(1e6, 0.0, 3600.0), 3600.0);
        assert_eq!(upload_time(1e6, 8e6, 3600.0), 1.0);
        assert_eq!(upload_time(1e12, 1.0, 3600.0), 3600.0);
    }

    #[test]
    fn csv_round_trip() {
        let s = scenario(Band::Lte1800);
        let obs = simulate(&s, 50, 8).unwrap();
        let mut buf = Vec::new();
        write_observations(&obs, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x,y,z,env,d,gamma,penetration_db,pl_db,rsrp_dbm,ptx_dbm,snr_db,thr_bps,t_ul_s\n"));
        let rows = read_observations(buf.as_slice()).unwrap();
        assert_eq!(rows.len(), 50);
        for (r, o) in rows.iter().zip(&obs) {
            assert_eq!(*r, ObservationRow::from(o));
        }
    }

    #[test]
    fn invalid_geometry() {
        let mut g = ScenarioGeometry::default();
        g.sc_position.y = 5.0;
        assert!(g.validate().is_err());
        let g = ScenarioGeometry { floors: 0, ..Default::default() };
        assert!(g.validate().is_err());
    }
}
