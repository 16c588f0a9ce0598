//! Model building from measurements: log-distance regression, per-point
//! exponent extraction, distribution fitting and goodness of fit.

mod ks;
mod mle;
pub mod optimize;
mod regression;
mod series;

pub use ks::{kolmogorov_survival, ks_statistic, ks_test, FitReport};
pub use mle::{fit_gev, fit_scaled_beta, DistributionFit, FitOptions, SupportRule};
pub use regression::{fit_log_distance, RegressionFit};
pub use series::{extract_ple_series, split_by_breakpoint, PlePoint, PleSeries};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("need at least {min} points, got {n}")]
    TooFewPoints { n: usize, min: usize },
    #[error("all samples share one distance; slope is not identifiable")]
    RankDeficient,
    #[error("sample is degenerate (constant values)")]
    Degenerate,
    #[error("sample contains non-finite values")]
    NonFinite,
    #[error("value {value} lies outside the support [{lower}, {upper}]")]
    OutsideSupport { value: f64, lower: f64, upper: f64 },
    #[error(
        "maximum likelihood did not converge after {evaluations} evaluations \
         (objective {objective}, simplex spread {spread})"
    )]
    NonConvergence { evaluations: usize, objective: f64, spread: f64 },
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
}

/// One path-loss observation derived from a drive-test record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathLossSample {
    pub distance_m: f64,
    pub path_loss_db: f64,
    pub band_mhz: f64,
    pub source_tool: String,
    pub timestamp_s: f64,
}
