//! `simulate`: Monte Carlo run and Exposure Index report.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use expose_core::exposure::aggregate_ei;
use expose_core::link::ResourceBlockPolicy;
use expose_core::scenario::{calibrate_efficiency, simulate, write_observations, Calibration};
use expose_core::{EiBreakdown, Environment, PleSource, Scenario, UserObservation};
use serde::{Deserialize, Serialize};

use crate::config::{ModelSource, RunConfig};
use crate::error::CliError;

pub const OBSERVATIONS_FILE: &str = "observations.csv";
pub const REPORT_JSON: &str = "ei_report.json";
pub const REPORT_CSV: &str = "ei_report.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub source: ModelSource,
    pub intercept_db: f64,
    pub exponent: PleSource,
}

/// Constants the run depends on that the measurements do not pin down.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationConstants {
    pub throughput_efficiency: f64,
    pub throughput_cap_bps: f64,
    pub resource_blocks: ResourceBlockPolicy,
    pub tx_power_average: String,
    pub downlink_received_power: String,
    /// Present when the efficiency was tuned to a target upload time.
    pub efficiency_calibration: Option<Calibration>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportHeader {
    pub program: String,
    pub version: String,
    pub seed: u64,
    pub n_observations: usize,
    pub config: RunConfig,
    pub model: ModelSummary,
    pub calibration: CalibrationConstants,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EiReport {
    pub header: ReportHeader,
    pub strata: Vec<EiBreakdown>,
    pub overall: EiBreakdown,
    pub indoor_outdoor_ratio: Option<f64>,
}

impl EiReport {
    pub fn stratum(&self, env: Environment) -> Option<&EiBreakdown> {
        self.strata.iter().find(|s| s.stratum.environment == Some(env))
    }
}

pub struct SimulationOutput {
    pub observations: Vec<UserObservation>,
    pub report: EiReport,
}

fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n);
    }
    builder.build().map_err(CliError::numeric)
}

/// Runs the configured scenario. `cfg.seed` and `cfg.n_observations` are
/// taken as final; `base_dir` resolves a relative model path.
pub fn run(cfg: &RunConfig, base_dir: &Path) -> Result<SimulationOutput, CliError> {
    cfg.validate()?;
    let (model, source) = cfg.path_loss_model(base_dir)?;
    let mut scenario = Scenario { geometry: cfg.geometry, occupancy: cfg.occupancy.clone(), model, radio: cfg.radio };
    scenario.validate()?;
    let sar = cfg.sar.lookup(cfg.radio.band.carrier_mhz(), &cfg.occupancy)?.clone();

    let pool = pool(cfg.worker_count)?;
    let n = cfg.n_observations;
    let (observations, calibration) = pool.install(|| -> Result<_, CliError> {
        let calibration = match cfg.calibration.target_mean_ul_time_s {
            Some(target) => {
                let c = calibrate_efficiency(&scenario, n, cfg.seed, target)?;
                log::info!("throughput efficiency calibrated to {:.6} for {target} s", c.efficiency);
                scenario.radio.throughput.efficiency = c.efficiency;
                Some(c)
            }
            None => None,
        };
        Ok((simulate(&scenario, n, cfg.seed)?, calibration))
    })?;

    let agg = aggregate_ei(&observations, &sar, &cfg.radio.band, &cfg.occupancy, cfg.stratification)?;
    let ratio = match (agg.stratum(Environment::Indoor), agg.stratum(Environment::Outdoor)) {
        (Some(i), Some(o)) if o.ei > 0.0 => Some(i.ei / o.ei),
        _ => None,
    };
    let header = ReportHeader {
        program: "expose-sim".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: cfg.seed,
        n_observations: n,
        config: cfg.clone(),
        model: ModelSummary {
            source,
            intercept_db: scenario.model.intercept_db(),
            exponent: *scenario.model.exponent(),
        },
        calibration: CalibrationConstants {
            throughput_efficiency: scenario.radio.throughput.efficiency,
            throughput_cap_bps: scenario.radio.throughput.cap_bps,
            resource_blocks: scenario.radio.resource_blocks,
            tx_power_average: "upload-time weighted".into(),
            downlink_received_power: "rsrp".into(),
            efficiency_calibration: calibration,
        },
    };
    Ok(SimulationOutput {
        observations,
        report: EiReport { header, strata: agg.strata, overall: agg.overall, indoor_outdoor_ratio: ratio },
    })
}

pub const REPORT_CSV_HEADER: [&str; 14] = [
    "stratum",
    "band_mhz",
    "fraction",
    "n_observations",
    "mean_tx_power_w",
    "sar_ul",
    "mean_received_power_w",
    "mean_incident_density_w_m2",
    "sar_dl",
    "mean_ul_time_s",
    "dl_time_s",
    "dl_exposure",
    "ul_exposure",
    "ei",
];

pub fn write_report_csv<W: Write>(report: &EiReport, out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPORT_CSV_HEADER)?;
    for b in report.strata.iter().chain([&report.overall]) {
        let name = b.stratum.environment.map_or("overall", Environment::as_str);
        w.write_record([
            name.to_string(),
            b.stratum.band_mhz.to_string(),
            b.stratum.fraction.to_string(),
            b.stratum.n_observations.to_string(),
            b.mean_tx_power_w.to_string(),
            b.sar_ul.to_string(),
            b.mean_received_power_w.to_string(),
            b.mean_incident_density_w_m2.to_string(),
            b.sar_dl.to_string(),
            b.mean_ul_time_s.to_string(),
            b.dl_time_s.to_string(),
            b.dl_exposure.to_string(),
            b.ul_exposure.to_string(),
            b.ei.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_outputs(out_dir: &Path, output: &SimulationOutput) -> Result<(), CliError> {
    std::fs::create_dir_all(out_dir)?;
    let mut obs = BufWriter::new(File::create(out_dir.join(OBSERVATIONS_FILE))?);
    write_observations(&output.observations, &mut obs)?;
    obs.flush()?;

    let mut json = serde_json::to_string_pretty(&output.report)?;
    json.push('\n');
    std::fs::write(out_dir.join(REPORT_JSON), json)?;

    let mut csv_out = BufWriter::new(File::create(out_dir.join(REPORT_CSV))?);
    write_report_csv(&output.report, &mut csv_out)?;
    csv_out.flush()?;
    Ok(())
}

pub fn print_summary(report: &EiReport) {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<8} {:>10} {:>12} {:>12} {:>12} {:>12} {:>12}",
        "stratum", "fraction", "P_tx [W]", "P_rx [W]", "UL [W/kg]", "DL [W/kg]", "EI [W/kg]"
    );
    for b in report.strata.iter().chain([&report.overall]) {
        let _ = writeln!(
            s,
            "{:<8} {:>10.4} {:>12.3e} {:>12.3e} {:>12.3e} {:>12.3e} {:>12.3e}",
            b.stratum.environment.map_or("overall", Environment::as_str),
            b.stratum.fraction,
            b.mean_tx_power_w,
            b.mean_received_power_w,
            b.ul_exposure,
            b.dl_exposure,
            b.ei
        );
    }
    if let Some(r) = report.indoor_outdoor_ratio {
        let _ = writeln!(s, "indoor/outdoor EI ratio: {r:.3}");
    }
    crate::emit(&s);
}
