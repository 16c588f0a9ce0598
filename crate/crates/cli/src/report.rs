//! `report`: plot-ready tables from an observation dump.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use expose_core::scenario::{read_observations, ObservationRow};
use expose_core::Environment;

use crate::error::CliError;

pub const HISTOGRAM_BINS: usize = 40;

/// Empirical CDF with ties collapsed: one `(value, F(value))` per distinct value.
pub fn empirical_cdf(values: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, v) in sorted.iter().enumerate() {
        let f = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == *v => last.1 = f,
            _ => out.push((*v, f)),
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

/// Equal-width bins over the data range; the last bin is closed.
pub fn histogram(values: &[f64], bins: usize) -> Vec<Bin> {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let (Some(lo), Some(hi)) = (finite.iter().copied().reduce(f64::min), finite.iter().copied().reduce(f64::max))
    else {
        return Vec::new();
    };
    if lo == hi || bins == 0 {
        return vec![Bin { lower: lo, upper: hi, count: finite.len() }];
    }
    let width = (hi - lo) / bins as f64;
    let mut out: Vec<Bin> = (0..bins)
        .map(|i| Bin {
            lower: lo + i as f64 * width,
            upper: if i + 1 == bins { hi } else { lo + (i + 1) as f64 * width },
            count: 0,
        })
        .collect();
    for v in finite {
        let i = (((v - lo) / width) as usize).min(bins - 1);
        out[i].count += 1;
    }
    out
}

type Column = (&'static str, fn(&ObservationRow) -> f64);

const CDF_COLUMNS: [Column; 3] = [("rsrp_dbm", |r| r.rsrp_dbm), ("ptx_dbm", |r| r.ptx_dbm), ("pl_db", |r| r.pl_db)];

const HISTOGRAM_COLUMNS: [Column; 4] =
    [("gamma", |r| r.gamma), ("rsrp_dbm", |r| r.rsrp_dbm), ("ptx_dbm", |r| r.ptx_dbm), ("t_ul_s", |r| r.t_ul_s)];

fn groups(rows: &[ObservationRow]) -> Vec<(&'static str, Vec<&ObservationRow>)> {
    let mut out = vec![("all", rows.iter().collect::<Vec<_>>())];
    for env in Environment::ALL {
        out.push((env.as_str(), rows.iter().filter(|r| r.env == env).collect()));
    }
    out
}

fn create(dir: &Path, name: &str) -> Result<csv::Writer<BufWriter<File>>, CliError> {
    Ok(csv::Writer::from_writer(BufWriter::new(File::create(dir.join(name))?)))
}

/// Writes `cdf_<col>.csv`, `hist_<col>.csv` and `gamma_vs_distance.csv`.
/// Returns the file names written.
pub fn write_plot_data(rows: &[ObservationRow], out_dir: &Path) -> Result<Vec<String>, CliError> {
    std::fs::create_dir_all(out_dir)?;
    if rows.is_empty() {
        log::warn!("observation dump is empty; writing header-only plot files");
    }
    let mut written = Vec::new();
    let groups = groups(rows);

    for (name, get) in CDF_COLUMNS {
        let file = format!("cdf_{name}.csv");
        let mut w = create(out_dir, &file)?;
        w.write_record(["group", name, "cdf"])?;
        for (group, members) in &groups {
            let values: Vec<f64> = members.iter().map(|r| get(r)).collect();
            for (v, f) in empirical_cdf(&values) {
                w.write_record([group.to_string(), v.to_string(), f.to_string()])?;
            }
        }
        w.flush()?;
        written.push(file);
    }

    for (name, get) in HISTOGRAM_COLUMNS {
        let file = format!("hist_{name}.csv");
        let mut w = create(out_dir, &file)?;
        w.write_record(["group", "lower", "upper", "count"])?;
        for (group, members) in &groups {
            let values: Vec<f64> = members.iter().map(|r| get(r)).collect();
            for b in histogram(&values, HISTOGRAM_BINS) {
                w.write_record([group.to_string(), b.lower.to_string(), b.upper.to_string(), b.count.to_string()])?;
            }
        }
        w.flush()?;
        written.push(file);
    }

    let file = "gamma_vs_distance.csv".to_string();
    let mut w = create(out_dir, &file)?;
    w.write_record(["env", "d", "gamma"])?;
    for r in rows {
        w.write_record([r.env.as_str().to_string(), r.d.to_string(), r.gamma.to_string()])?;
    }
    w.flush()?;
    written.push(file);
    Ok(written)
}

pub fn run(obs_path: &Path, out_dir: &Path) -> Result<Vec<String>, CliError> {
    let file =
        File::open(obs_path).map_err(|e| CliError::data(e).context(format!("opening {}", obs_path.display())))?;
    let rows = read_observations(BufReader::new(file))
        .map_err(|e| CliError::data(e).context(format!("reading {}", obs_path.display())))?;
    let written = write_plot_data(&rows, out_dir)?;
    let mut index = BufWriter::new(File::create(out_dir.join("index.txt"))?);
    writeln!(index, "observations: {}", rows.len())?;
    for f in &written {
        writeln!(index, "{f}")?;
    }
    index.flush()?;
    Ok(written)
}
