//! `fit`: drive-test exports to a banded exponent model.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use expose_core::fitting::{
    extract_ple_series, fit_gev, fit_log_distance, fit_scaled_beta, ks_test, split_by_breakpoint, FitOptions,
    SupportRule,
};
use expose_core::ingest::{merge_by_time, parse_drive_test, to_pathloss_samples, GeoPoint, RejectionTally, ToolSchema};
use expose_core::model::presets::Band;
use expose_core::model_file::{FitProvenance, GoodnessOfFit};
use expose_core::{free_space_intercept, BandedPleDistribution, FitReport, ModelFile, RegressionFit};

use crate::error::CliError;

#[derive(Debug, Clone)]
pub struct FitRequest {
    pub inputs: Vec<PathBuf>,
    /// One tag for all inputs, or one per input.
    pub tools: Vec<String>,
    pub band_mhz: f64,
    pub small_cell: GeoPoint,
    pub sc_gain_db: f64,
    pub schemas: Vec<ToolSchema>,
    pub beta_support: SupportRule,
    pub breakpoint_m: f64,
    pub min_points: usize,
}

#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub model: ModelFile,
    /// Single-slope fit with a free intercept.
    pub free_regression: RegressionFit,
}

/// Parses `mle`, `sample-range`, `sample-range:<pad>` or `<lower>:<upper>`.
pub fn parse_support_rule(s: &str) -> Result<SupportRule, String> {
    match s {
        "mle" => return Ok(SupportRule::ProfileMle),
        "sample-range" => return Ok(SupportRule::default()),
        _ => {}
    }
    if let Some(pad) = s.strip_prefix("sample-range:") {
        let pad_fraction: f64 = pad.parse().map_err(|_| format!("bad padding `{pad}`"))?;
        if !(pad_fraction >= 0.0 && pad_fraction.is_finite()) {
            return Err(format!("padding must be non-negative, got {pad_fraction}"));
        }
        return Ok(SupportRule::SampleRange { pad_fraction });
    }
    let (lo, hi) =
        s.split_once(':').ok_or_else(|| format!("expected mle, sample-range or <lower>:<upper>, got `{s}`"))?;
    let lower: f64 = lo.trim().parse().map_err(|_| format!("bad lower bound `{lo}`"))?;
    let upper: f64 = hi.trim().parse().map_err(|_| format!("bad upper bound `{hi}`"))?;
    if !(lower < upper) {
        return Err(format!("lower bound {lower} must be below upper bound {upper}"));
    }
    Ok(SupportRule::Fixed { lower, upper })
}

fn rule_name(rule: &SupportRule) -> String {
    match rule {
        SupportRule::SampleRange { pad_fraction } => format!("sample-range:{pad_fraction}"),
        SupportRule::Fixed { lower, upper } => format!("{lower}:{upper}"),
        SupportRule::ProfileMle => "mle".into(),
    }
}

pub fn load_schemas(path: &Path) -> Result<Vec<ToolSchema>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::data(e).context(format!("reading schemas {}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::data(e).context(format!("schemas {}", path.display())))
}

fn schema_for(tag: &str, schemas: &[ToolSchema]) -> ToolSchema {
    schemas.iter().find(|s| s.tag == tag).cloned().unwrap_or_else(|| ToolSchema::canonical(tag))
}

pub fn run(req: &FitRequest) -> Result<FitOutcome, CliError> {
    if req.inputs.is_empty() {
        return Err(CliError::usage("at least one --in file is required"));
    }
    if req.tools.len() != 1 && req.tools.len() != req.inputs.len() {
        return Err(CliError::usage(format!(
            "give one --tool for all inputs or one per input ({} inputs, {} tools)",
            req.inputs.len(),
            req.tools.len()
        )));
    }
    let band = Band::from_mhz(req.band_mhz)
        .map(Band::frequency_band)
        .ok_or_else(|| CliError::usage(format!("unsupported band {} MHz (1800 or 2600)", req.band_mhz)))?;

    let mut provenance = FitProvenance { beta_support_rule: rule_name(&req.beta_support), ..FitProvenance::default() };
    let mut sets = Vec::new();
    let mut rejections = RejectionTally::default();
    for (i, path) in req.inputs.iter().enumerate() {
        let tag = if req.tools.len() == 1 { &req.tools[0] } else { &req.tools[i] };
        let schema = schema_for(tag, &req.schemas);
        let file = File::open(path).map_err(|e| CliError::data(e).context(format!("opening {}", path.display())))?;
        let parsed = parse_drive_test(BufReader::new(file), &schema)
            .map_err(|e| CliError::data(e).context(format!("parsing {}", path.display())))?;
        provenance.rows_read += parsed.rows;
        rejections.merge(&parsed.rejections);
        provenance.input_files.push(path.display().to_string());
        sets.push(parsed.records);
    }
    provenance.rejections = rejections;
    let records = merge_by_time(sets);
    let in_band: Vec<_> = records.into_iter().filter(|r| (r.band_mhz - req.band_mhz).abs() < 0.5).collect();

    let conversion = to_pathloss_samples(&in_band, req.small_cell, req.sc_gain_db)?;
    provenance.missing_power = conversion.missing_power;
    provenance.too_close = conversion.too_close;
    provenance.implausible = conversion.implausible;
    let samples = conversion.samples;
    if samples.is_empty() {
        return Err(CliError::data(anyhow::anyhow!(
            "no valid samples: {} in-band records, {} without RSRP/RS, {} within 1 m of the small cell",
            in_band.len(),
            conversion.missing_power,
            conversion.too_close
        )));
    }
    for s in &samples {
        *provenance.samples_per_tool.entry(s.source_tool.clone()).or_default() += 1;
    }

    let intercept = free_space_intercept(&band);
    let free_regression = fit_log_distance(&samples, None)?;
    let anchored = fit_log_distance(&samples, Some(intercept))?;
    let series = extract_ple_series(&samples, intercept);
    let (near, far) = split_by_breakpoint(&series.points, req.breakpoint_m);
    provenance.near_points = near.len();
    provenance.far_points = far.len();
    let near: Vec<f64> = near.iter().map(|p| p.gamma).collect();
    let far: Vec<f64> = far.iter().map(|p| p.gamma).collect();

    let opts = FitOptions { min_points: req.min_points, ..FitOptions::default() };
    let near_fit = fit_gev(&near, &opts).map_err(|e| CliError::from(e).context("near band"))?;
    let far_fit = fit_scaled_beta(&far, req.beta_support, &opts).map_err(|e| CliError::from(e).context("far band"))?;
    let near_ks = ks_test(&near, &near_fit.distribution)?;
    let far_ks = ks_test(&far, &far_fit.distribution)?;
    let exponent = BandedPleDistribution::new(req.breakpoint_m, near_fit.distribution, far_fit.distribution)
        .map_err(CliError::usage)?;

    Ok(FitOutcome {
        model: ModelFile {
            band,
            intercept_db: intercept,
            exponent,
            goodness_of_fit: Some(GoodnessOfFit { near: near_ks, far: far_ks }),
            regression: Some(anchored),
            provenance: Some(provenance),
        },
        free_regression,
    })
}

fn describe(report: &FitReport) -> String {
    use expose_core::PleDistribution::*;
    let params = match report.candidate {
        Gev(g) => format!("k={:.3} s={:.3} m={:.3}", g.shape(), g.scale(), g.location()),
        ScaledBeta(b) => format!("a1={:.3} a2={:.3} a={:.3} b={:.3}", b.alpha1(), b.alpha2(), b.lower(), b.upper()),
        Uniform(u) => format!("lo={:.3} hi={:.3}", u.lo(), u.hi()),
        Fixed { value } => format!("value={value:.3}"),
    };
    format!(
        "{:<12} {:<44} n={:<7} D={:.4} p={:.4}",
        report.candidate.kind_name(),
        params,
        report.n_points,
        report.ks_statistic,
        report.ks_p_value
    )
}

pub fn print_summary(outcome: &FitOutcome) {
    let mut s = String::new();
    let m = &outcome.model;
    let r = &outcome.free_regression;
    let _ = writeln!(s, "single-slope path loss, {} MHz", m.band.carrier_mhz());
    let _ = writeln!(
        s,
        "  free intercept: A={:.2} dB  gamma={:.3}  sigma={:.2} dB  n={}",
        r.intercept, r.gamma_hat, r.residual_std, r.n_points
    );
    if let Some(a) = &m.regression {
        let _ = writeln!(
            s,
            "  free-space A:   A={:.2} dB  gamma={:.3}  sigma={:.2} dB",
            a.intercept, a.gamma_hat, a.residual_std
        );
    }
    let _ = writeln!(s, "exponent distributions (breakpoint {} m)", m.exponent.breakpoint_m());
    if let Some(g) = &m.goodness_of_fit {
        let _ = writeln!(s, "  near  {}", describe(&g.near));
        let _ = writeln!(s, "  far   {}", describe(&g.far));
    }
    if let Some(p) = &m.provenance {
        let tools: BTreeMap<_, _> = p.samples_per_tool.iter().collect();
        let _ = writeln!(s, "samples per tool: {tools:?}");
        let _ = writeln!(
            s,
            "rows read {}, rejected {}, without RSRP/RS {}, too close {}, implausible {}",
            p.rows_read,
            p.rejections.total(),
            p.missing_power,
            p.too_close,
            p.implausible
        );
    }
    crate::emit(&s);
}
