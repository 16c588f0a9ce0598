//! Small-cell RF exposure toolkit.
//!
//! Fits distance-banded statistical path-loss-exponent models from drive-test
//! measurements, pushes them through LTE downlink/uplink link budgets, and
//! aggregates a population Exposure Index over an indoor/outdoor street
//! scenario.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod exposure;
pub mod fitting;
pub mod ingest;
pub mod link;
pub mod model;
pub mod model_file;
pub mod scenario;
pub mod units;

pub use exposure::{aggregate_ei, EiAggregate, EiBreakdown, ExposureError, SarEntry, SarTable, Stratification};
pub use fitting::{FitError, FitReport, PathLossSample, RegressionFit};
pub use ingest::{DriveTestRecord, IngestError, ToolSchema};
pub use link::{LinkError, LinkResult, RadioConfig};
pub use model::{
    free_space_intercept, BandedPleDistribution, FrequencyBand, ModelError, PathLossModel, PleDistribution, PleSource,
};
pub use model_file::ModelFile;
pub use scenario::{Environment, OccupancyProfile, Scenario, ScenarioError, ScenarioGeometry, UserObservation};
