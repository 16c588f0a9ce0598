//! `expose-sim`: fit exponent models from drive tests, simulate a small-cell
//! street scenario and report its Exposure Index.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod fit;
pub mod report;
pub mod simulate;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use expose_core::fitting::SupportRule;
use expose_core::ingest::GeoPoint;

pub use config::RunConfig;
pub use error::{CliError, ErrorKind};

#[derive(Debug, Parser)]
#[command(name = "expose-sim", version, about = "Small-cell RF exposure simulator")]
pub struct Cli {
    /// More log output (repeat for debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a banded exponent model from drive-test CSV exports.
    Fit {
        /// Drive-test CSV file (repeatable).
        #[arg(long = "in", required = true, num_args = 1)]
        inputs: Vec<PathBuf>,
        /// Tool tag: once for all inputs or once per input.
        #[arg(long = "tool", required = true, num_args = 1)]
        tools: Vec<String>,
        /// Carrier frequency, MHz (1800 or 2600).
        #[arg(long)]
        band: f64,
        #[arg(long)]
        out: PathBuf,
        /// Small-cell latitude, degrees.
        #[arg(long, allow_negative_numbers = true)]
        sc_lat: f64,
        /// Small-cell longitude, degrees.
        #[arg(long, allow_negative_numbers = true)]
        sc_lon: f64,
        /// Small-cell antenna gain, dBi.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        sc_gain: f64,
        /// JSON array of tool schemas mapping vendor columns.
        #[arg(long)]
        schemas: Option<PathBuf>,
        /// Beta support rule: mle, sample-range[:pad] or <lower>:<upper>.
        #[arg(long, default_value = "mle", value_parser = fit::parse_support_rule)]
        beta_support: SupportRule,
        #[arg(long, default_value_t = 60.0)]
        breakpoint: f64,
        #[arg(long, default_value_t = 50)]
        min_points: usize,
    },
    /// Run the Monte Carlo scenario and write the EI report.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Overrides the config seed and EXPOSE_SIM_SEED.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; results do not depend on it.
        #[arg(long)]
        workers: Option<usize>,
        /// Overrides the number of observations.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Emit CDF, histogram and scatter tables from an observation dump.
    Report {
        #[arg(long)]
        obs: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

/// Writes to stdout, ignoring a closed pipe.
pub(crate) fn emit(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|()| out.flush());
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Fit {
            inputs,
            tools,
            band,
            out,
            sc_lat,
            sc_lon,
            sc_gain,
            schemas,
            beta_support,
            breakpoint,
            min_points,
        } => {
            let schemas = match schemas {
                Some(p) => fit::load_schemas(&p)?,
                None => Vec::new(),
            };
            let req = fit::FitRequest {
                inputs,
                tools,
                band_mhz: band,
                small_cell: GeoPoint { lat: sc_lat, lon: sc_lon },
                sc_gain_db: sc_gain,
                schemas,
                beta_support,
                breakpoint_m: breakpoint,
                min_points,
            };
            let outcome = fit::run(&req)?;
            if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(&out, outcome.model.to_json() + "\n")?;
            fit::print_summary(&outcome);
            emit(&format!("model written to {}\n", out.display()));
            Ok(())
        }
        Command::Simulate { config, out_dir, seed, workers, n } => {
            let mut cfg = RunConfig::load(&config)?;
            let env_seed = std::env::var(config::SEED_ENV).ok();
            cfg.seed = config::resolve_seed(cfg.seed, env_seed.as_deref(), seed)?;
            if let Some(n) = n {
                cfg.n_observations = n;
            }
            if workers.is_some() {
                cfg.worker_count = workers;
            }
            let base = config.parent().unwrap_or(Path::new("."));
            let output = simulate::run(&cfg, base)?;
            simulate::write_outputs(&out_dir, &output)?;
            simulate::print_summary(&output.report);
            emit(&format!("results written to {}\n", out_dir.display()));
            Ok(())
        }
        Command::Report { obs, out_dir } => {
            let written = report::run(&obs, &out_dir)?;
            emit(&format!("{} plot tables written to {}\n", written.len(), out_dir.display()));
            Ok(())
        }
    }
}
