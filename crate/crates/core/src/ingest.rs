//! Drive-test exports to normalized records and path-loss samples.
//!
//! Each measurement tool writes its own CSV layout. A [`ToolSchema`] maps the
//! tool's header names onto the canonical fields; the normalized output uses
//! the canonical column names `t,lat,lon,rsrp_dbm,rs_dbm,ptx_dbm,m_rb,alpha,
//! p0_dbm,band_mhz,tool`.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fitting::PathLossSample;
use crate::units::REFERENCE_DISTANCE_M;

/// Mean Earth radius, m.
pub const EARTH_RADIUS_M: f64 = 6_371_008.8;

/// Fractional path-loss compensation factors allowed by LTE.
pub const ALLOWED_ALPHAS: [f64; 8] = [0.0, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];

pub const CANONICAL_HEADER: [&str; 11] =
    ["t", "lat", "lon", "rsrp_dbm", "rs_dbm", "ptx_dbm", "m_rb", "alpha", "p0_dbm", "band_mhz", "tool"];

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("unreadable header: {0}")]
    Header(String),
    #[error("required column `{0}` not found in header")]
    MissingColumn(String),
    #[error("no usable rows ({rows} read, all rejected)")]
    Empty { rows: usize },
    #[error("coordinate out of range: lat {lat}, lon {lon}")]
    Coordinates { lat: f64, lon: f64 },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Header names for each canonical field. Optional fields may be absent from
/// the file; the three positional fields must be present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnMap {
    pub t: String,
    pub lat: String,
    pub lon: String,
    pub rsrp: String,
    pub rs: String,
    pub ptx: String,
    pub m_rb: String,
    pub alpha: String,
    pub p0: String,
    pub band: String,
    pub tool: String,
}

impl Default for ColumnMap {
    fn default() -> Self {
        let c = CANONICAL_HEADER;
        Self {
            t: c[0].into(),
            lat: c[1].into(),
            lon: c[2].into(),
            rsrp: c[3].into(),
            rs: c[4].into(),
            ptx: c[5].into(),
            m_rb: c[6].into(),
            alpha: c[7].into(),
            p0: c[8].into(),
            band: c[9].into(),
            tool: c[10].into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolSchema {
    pub tag: String,
    #[serde(default)]
    pub columns: ColumnMap,
    /// Band for files that carry no band column.
    #[serde(default)]
    pub band_mhz: Option<f64>,
}

impl ToolSchema {
    pub fn canonical(tag: impl Into<String>) -> Self {
        Self { tag: tag.into(), columns: ColumnMap::default(), band_mhz: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveTestRecord {
    pub timestamp_s: f64,
    pub latitude: f64,
    pub longitude: f64,
    pub rsrp_dbm: Option<f64>,
    pub reference_signal_dbm: Option<f64>,
    pub uplink_tx_power_dbm: Option<f64>,
    pub resource_blocks: Option<u32>,
    pub alpha: Option<f64>,
    pub p0_dbm: Option<f64>,
    pub band_mhz: f64,
    pub tool: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    /// Wrong field count or a non-numeric value.
    Malformed,
    MissingPosition,
    CoordinatesOutOfRange,
    AlphaNotAllowed,
    NoResourceBlocks,
    NoPowerMeasurement,
    MissingBand,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RejectionTally(pub BTreeMap<RejectReason, usize>);

impl RejectionTally {
    pub fn add(&mut self, reason: RejectReason) {
        *self.0.entry(reason).or_default() += 1;
    }

    pub fn total(&self) -> usize {
        self.0.values().sum()
    }

    pub fn merge(&mut self, other: &RejectionTally) {
        for (k, v) in &other.0 {
            *self.0.entry(*k).or_default() += v;
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedDriveTest {
    pub records: Vec<DriveTestRecord>,
    pub rejections: RejectionTally,
    pub rows: usize,
}

fn is_allowed_alpha(alpha: f64) -> bool {
    ALLOWED_ALPHAS.iter().any(|a| (a - alpha).abs() < 1e-9)
}

struct ColumnIndex {
    t: usize,
    lat: usize,
    lon: usize,
    rsrp: Option<usize>,
    rs: Option<usize>,
    ptx: Option<usize>,
    m_rb: Option<usize>,
    alpha: Option<usize>,
    p0: Option<usize>,
    band: Option<usize>,
    tool: Option<usize>,
}

impl ColumnIndex {
    fn resolve(header: &csv::StringRecord, map: &ColumnMap) -> Result<Self, IngestError> {
        let find = |name: &str| header.iter().position(|h| h.trim() == name);
        let required = |name: &str| find(name).ok_or_else(|| IngestError::MissingColumn(name.to_string()));
        Ok(Self {
            t: required(&map.t)?,
            lat: required(&map.lat)?,
            lon: required(&map.lon)?,
            rsrp: find(&map.rsrp),
            rs: find(&map.rs),
            ptx: find(&map.ptx),
            m_rb: find(&map.m_rb),
            alpha: find(&map.alpha),
            p0: find(&map.p0),
            band: find(&map.band),
            tool: find(&map.tool),
        })
    }
}

enum Cell<T> {
    Absent,
    Value(T),
    Bad,
}

fn cell<T: std::str::FromStr>(row: &csv::StringRecord, idx: Option<usize>) -> Cell<T> {
    match idx.and_then(|i| row.get(i)).map(str::trim) {
        None | Some("") => Cell::Absent,
        Some(s) => s.parse().map_or(Cell::Bad, Cell::Value),
    }
}

fn parse_row(row: &csv::StringRecord, idx: &ColumnIndex, schema: &ToolSchema) -> Result<DriveTestRecord, RejectReason> {
    macro_rules! opt {
        ($idx:expr, $ty:ty) => {
            match cell::<$ty>(row, $idx) {
                Cell::Absent => None,
                Cell::Value(v) => Some(v),
                Cell::Bad => return Err(RejectReason::Malformed),
            }
        };
    }
    let timestamp_s = opt!(Some(idx.t), f64).ok_or(RejectReason::MissingPosition)?;
    let latitude = opt!(Some(idx.lat), f64).ok_or(RejectReason::MissingPosition)?;
    let longitude = opt!(Some(idx.lon), f64).ok_or(RejectReason::MissingPosition)?;
    let rsrp_dbm = opt!(idx.rsrp, f64);
    let reference_signal_dbm = opt!(idx.rs, f64);
    let uplink_tx_power_dbm = opt!(idx.ptx, f64);
    let resource_blocks = opt!(idx.m_rb, u32);
    let alpha = opt!(idx.alpha, f64);
    let p0_dbm = opt!(idx.p0, f64);
    let band_mhz = opt!(idx.band, f64).or(schema.band_mhz).ok_or(RejectReason::MissingBand)?;
    let tool = match idx.tool.and_then(|i| row.get(i)).map(str::trim) {
        Some(t) if !t.is_empty() => t.to_string(),
        _ => schema.tag.clone(),
    };

    let finite = [
        Some(timestamp_s),
        Some(latitude),
        Some(longitude),
        rsrp_dbm,
        reference_signal_dbm,
        uplink_tx_power_dbm,
        alpha,
        p0_dbm,
        Some(band_mhz),
    ];
    if finite.iter().flatten().any(|v| !v.is_finite()) {
        return Err(RejectReason::Malformed);
    }
    if !(-90.0..=90.0).contains(&latitude) || !(-180.0..=180.0).contains(&longitude) {
        return Err(RejectReason::CoordinatesOutOfRange);
    }
    if alpha.is_some_and(|a| !is_allowed_alpha(a)) {
        return Err(RejectReason::AlphaNotAllowed);
    }
    if resource_blocks == Some(0) {
        return Err(RejectReason::NoResourceBlocks);
    }
    if rsrp_dbm.is_none() && uplink_tx_power_dbm.is_none() {
        return Err(RejectReason::NoPowerMeasurement);
    }
    if !(band_mhz > 0.0) {
        return Err(RejectReason::MissingBand);
    }
    Ok(DriveTestRecord {
        timestamp_s,
        latitude,
        longitude,
        rsrp_dbm,
        reference_signal_dbm,
        uplink_tx_power_dbm,
        resource_blocks,
        alpha,
        p0_dbm,
        band_mhz,
        tool,
    })
}

/// Reads one drive-test export. Rows that fail validation are skipped and
/// tallied; `records.len() + rejections.total() == rows`.
pub fn parse_drive_test<R: Read>(input: R, schema: &ToolSchema) -> Result<ParsedDriveTest, IngestError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::All).from_reader(input);
    let header = reader.headers().map_err(|e| IngestError::Header(e.to_string()))?.clone();
    if header.is_empty() || header.iter().all(str::is_empty) {
        return Err(IngestError::Header("empty header row".into()));
    }
    let idx = ColumnIndex::resolve(&header, &schema.columns)?;

    let mut out = ParsedDriveTest::default();
    for row in reader.records() {
        out.rows += 1;
        let row = match row {
            Ok(r) if r.len() == header.len() => r,
            Ok(_) => {
                out.rejections.add(RejectReason::Malformed);
                continue;
            }
            Err(e) if e.is_io_error() => return Err(e.into()),
            Err(_) => {
                out.rejections.add(RejectReason::Malformed);
                continue;
            }
        };
        match parse_row(&row, &idx, schema) {
            Ok(rec) => out.records.push(rec),
            Err(reason) => out.rejections.add(reason),
        }
    }
    if out.records.is_empty() {
        return Err(IngestError::Empty { rows: out.rows });
    }
    Ok(out)
}

/// Writes records with the canonical header.
pub fn write_canonical<W: Write>(records: &[DriveTestRecord], output: W) -> Result<(), IngestError> {
    fn opt<T: ToString>(v: &Option<T>) -> String {
        v.as_ref().map(T::to_string).unwrap_or_default()
    }
    let mut w = csv::Writer::from_writer(output);
    w.write_record(CANONICAL_HEADER)?;
    for r in records {
        w.write_record([
            r.timestamp_s.to_string(),
            r.latitude.to_string(),
            r.longitude.to_string(),
            opt(&r.rsrp_dbm),
            opt(&r.reference_signal_dbm),
            opt(&r.uplink_tx_power_dbm),
            opt(&r.resource_blocks),
            opt(&r.alpha),
            opt(&r.p0_dbm),
            r.band_mhz.to_string(),
            r.tool.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Merges record sets from several files, ordered by timestamp (stable).
pub fn merge_by_time(sets: Vec<Vec<DriveTestRecord>>) -> Vec<DriveTestRecord> {
    let mut all: Vec<DriveTestRecord> = sets.into_iter().flatten().collect();
    all.sort_by(|a, b| a.timestamp_s.total_cmp(&b.timestamp_s));
    all
}

/// Great-circle (haversine) distance in meters.
pub fn gps_distance(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> Result<f64, IngestError> {
    for (lat, lon) in [(lat1, lon1), (lat2, lon2)] {
        if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
            return Err(IngestError::Coordinates { lat, lon });
        }
    }
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    Ok(2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PathLossConversion {
    pub samples: Vec<PathLossSample>,
    /// Records without RSRP or RS.
    pub missing_power: usize,
    /// Records within the reference distance of the antenna.
    pub too_close: usize,
    /// Retained samples with non-positive path loss.
    pub implausible: usize,
}

/// `PL = RS + G_sc - RSRP` at the haversine distance to the small cell.
pub fn to_pathloss_samples(
    records: &[DriveTestRecord],
    small_cell: GeoPoint,
    sc_gain_db: f64,
) -> Result<PathLossConversion, IngestError> {
    let mut out = PathLossConversion::default();
    for r in records {
        let (Some(rsrp), Some(rs)) = (r.rsrp_dbm, r.reference_signal_dbm) else {
            out.missing_power += 1;
            continue;
        };
        let distance_m = gps_distance(small_cell.lat, small_cell.lon, r.latitude, r.longitude)?;
        if distance_m <= REFERENCE_DISTANCE_M {
            out.too_close += 1;
            continue;
        }
        let path_loss_db = rs + sc_gain_db - rsrp;
        if path_loss_db <= 0.0 {
            log::warn!("implausible path loss {path_loss_db} dB at t={} ({})", r.timestamp_s, r.tool);
            out.implausible += 1;
        }
        out.samples.push(PathLossSample {
            distance_m,
            path_loss_db,
            band_mhz: r.band_mhz,
            source_tool: r.tool.clone(),
            timestamp_s: r.timestamp_s,
        });
    }
    Ok(out)
}
