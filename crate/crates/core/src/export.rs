//! Campaign execution and result files.
//!
//! Per mode a campaign writes `samples_<mode>.csv`, `cdf_sinr_<mode>.csv`
//! (SINR in dB) and `cdf_se_<mode>.csv` (bit/s/Hz); a single `summary.json`
//! collects one record per mode. CSV files are UTF-8 with a header row and
//! `.` as decimal separator. Floats are written in shortest round-trip form,
//! so files parse back to the exact values.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::beamforming::Mode;
use crate::config::ScenarioConfig;
use crate::simulation::{EmpiricalCdf, RunResults, Simulator};
use crate::{linear_to_db, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub iteration: u64,
    pub beam: usize,
    pub lat_deg: f64,
    pub lon_deg: f64,
    pub sinr_db: f64,
    pub se_bps_hz: f64,
    pub capacity_kbit_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdfRow {
    pub value: f64,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Percentiles {
    pub min: f64,
    pub p10: f64,
    pub p25: f64,
    pub p50: f64,
    pub p75: f64,
    pub p90: f64,
    pub max: f64,
}

impl Percentiles {
    pub fn of(cdf: &EmpiricalCdf) -> Self {
        Self {
            min: cdf.min(),
            p10: cdf.quantile(0.10),
            p25: cdf.quantile(0.25),
            p50: cdf.quantile(0.50),
            p75: cdf.quantile(0.75),
            p90: cdf.quantile(0.90),
            max: cdf.max(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub mode: Mode,
    pub antenna_set: String,
    pub altitude_km: f64,
    pub iterations: u64,
    pub seed: u64,
    pub samples: usize,
    pub redraws: u64,
    pub per_satellite_power_dbw: f64,
    pub avg_capacity_kbit_s: f64,
    pub mean_se_bps_hz: f64,
    pub sinr_db: Percentiles,
}

impl SummaryRecord {
    pub fn new(config: &ScenarioConfig, run: &RunResults) -> Self {
        Self {
            mode: run.mode,
            antenna_set: config.antenna_set.as_str().to_string(),
            altitude_km: config.altitude_m / 1e3,
            iterations: config.iterations,
            seed: config.seed,
            samples: run.samples.len(),
            redraws: run.redraws,
            per_satellite_power_dbw: linear_to_db(run.per_satellite_power),
            avg_capacity_kbit_s: capacity_kbit_s(run),
            mean_se_bps_hz: run.samples.iter().map(|s| s.se).sum::<f64>() / run.samples.len() as f64,
            sinr_db: Percentiles::of(&run.sinr_db_cdf),
        }
    }
}

/// Mean of the per-sample capacities as written to the samples file.
fn capacity_kbit_s(run: &RunResults) -> f64 {
    run.samples.iter().map(|s| s.capacity / 1e3).sum::<f64>() / run.samples.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub records: Vec<SummaryRecord>,
}

#[derive(Debug, Clone)]
pub struct ModeFiles {
    pub samples: PathBuf,
    pub sinr_cdf: PathBuf,
    pub se_cdf: PathBuf,
}

#[derive(Debug, Clone)]
pub struct ResultExport {
    pub files: BTreeMap<Mode, ModeFiles>,
    pub summary_path: PathBuf,
    pub summary: Summary,
}

pub fn sample_rows(run: &RunResults) -> Vec<SampleRow> {
    run.samples
        .iter()
        .map(|s| SampleRow {
            iteration: s.iteration,
            beam: s.beam,
            lat_deg: s.user.latitude.to_degrees(),
            lon_deg: s.user.longitude.to_degrees(),
            sinr_db: s.sinr_db,
            se_bps_hz: s.se,
            capacity_kbit_s: s.capacity / 1e3,
        })
        .collect()
}

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let csv_err = |source| Error::Csv { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let csv_err = |source| Error::Csv { path: path.to_path_buf(), source };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize().collect::<std::result::Result<_, _>>().map_err(csv_err)
}

fn cdf_rows(cdf: &EmpiricalCdf) -> impl Iterator<Item = CdfRow> + '_ {
    cdf.points().iter().map(|&(value, probability)| CdfRow { value, probability })
}

/// Writes the result files of one run into `dir`.
pub fn write_run(dir: &Path, run: &RunResults) -> Result<ModeFiles> {
    let files = ModeFiles {
        samples: dir.join(format!("samples_{}.csv", run.mode)),
        sinr_cdf: dir.join(format!("cdf_sinr_{}.csv", run.mode)),
        se_cdf: dir.join(format!("cdf_se_{}.csv", run.mode)),
    };
    write_csv(&files.samples, sample_rows(run))?;
    write_csv(&files.sinr_cdf, cdf_rows(&run.sinr_db_cdf))?;
    write_csv(&files.se_cdf, cdf_rows(&run.se_cdf))?;
    Ok(files)
}

pub fn write_summary(path: &Path, summary: &Summary) -> Result<()> {
    let mut text = serde_json::to_string_pretty(summary).expect("summary serialises");
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_summary(path: &Path) -> Result<Summary> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::config("summary", e.to_string()))
}

/// Runs every mode on the same drops (same seed) and writes the results to
/// `config.out_dir`.
pub fn run_campaign(config: &ScenarioConfig, modes: &[Mode]) -> Result<ResultExport> {
    let runs = Simulator::new(config)?.run_modes(modes)?;
    export_runs(config, &runs)
}

pub fn export_runs(config: &ScenarioConfig, runs: &BTreeMap<Mode, RunResults>) -> Result<ResultExport> {
    let dir = &config.out_dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = BTreeMap::new();
    let mut records = Vec::new();
    for (mode, run) in runs {
        files.insert(*mode, write_run(dir, run)?);
        records.push(SummaryRecord::new(config, run));
    }
    let summary = Summary { records };
    let summary_path = dir.join("summary.json");
    write_summary(&summary_path, &summary)?;
    Ok(ResultExport { files, summary_path, summary })
}
