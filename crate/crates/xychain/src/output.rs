//! Output files.
//!
//! Every run writes `manifest.json` next to its results. Area-law runs add
//! `records.csv`, `params.csv`, `summary.json` and, with a control,
//! `control.csv`. Correlator runs add `profiles_n<n>.csv` and `fits.json`.
//! Verify runs add `verify.json`.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};
use xychain_core::freefermion::{BOGOLIUBOV_TOL, CLAMP_WINDOW, PAIRING_TOL, PROJECTION_TOL};
use xychain_core::localization::{FIT_FLOOR, MAX_RESAMPLES};
use xychain_core::oracle;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{AppError, AppResult};
use crate::experiments::{
    run_arealaw, run_correlator, run_verify, ArealawOutcome, CorrelatorRun, VerifyReport,
};

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub kind: &'static str,
    pub version: &'static str,
    pub config_sha256: String,
    pub master_seed: u64,
    pub realizations: usize,
    pub n_values: Vec<usize>,
    pub tolerances: BTreeMap<&'static str, f64>,
    pub max_resamples: u64,
    pub timestamp_unix: u64,
    pub config: String,
}

/// SHA-256 of the canonical TOML with `output_dir` blanked, so the digest
/// identifies the experiment rather than where it was written.
pub fn config_digest(config: &ExperimentConfig) -> String {
    let mut c = config.clone();
    c.output_dir = PathBuf::new();
    hex::encode(Sha256::digest(c.to_toml().as_bytes()))
}

pub fn tolerances() -> BTreeMap<&'static str, f64> {
    BTreeMap::from([
        ("bogoliubov", BOGOLIUBOV_TOL),
        ("clamp_window", CLAMP_WINDOW),
        ("pairing", PAIRING_TOL),
        ("projection", PROJECTION_TOL),
        ("fit_floor", FIT_FLOOR),
        ("oracle_quadratic_form", oracle::QUADRATIC_FORM_TOL),
        ("oracle_spectrum", oracle::SPECTRUM_TOL),
        ("oracle_correlation", oracle::CORRELATION_TOL),
        ("oracle_entropy", oracle::ENTROPY_TOL),
    ])
}

impl Manifest {
    pub fn new(config: &ExperimentConfig) -> Self {
        let timestamp_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Manifest {
            kind: config.kind.name(),
            version: env!("CARGO_PKG_VERSION"),
            config_sha256: config_digest(config),
            master_seed: config.master_seed,
            realizations: config.realizations,
            n_values: config.n_values.clone(),
            tolerances: tolerances(),
            max_resamples: MAX_RESAMPLES,
            timestamp_unix,
            config: config.to_toml(),
        }
    }
}

fn create(path: &Path) -> AppResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(AppError::io(path))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> AppResult<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").map_err(AppError::io(path))?;
    w.flush().map_err(AppError::io(path))
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> AppResult<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(AppError::io(path))
}

#[derive(Serialize)]
struct ProfileRow {
    d: usize,
    q_mean: f64,
    q_stderr: f64,
    n_pairs: usize,
}

pub fn write_profile(path: &Path, run: &CorrelatorRun) -> AppResult<()> {
    let p = &run.profile;
    let rows: Vec<ProfileRow> = (0..p.len())
        .map(|i| ProfileRow {
            d: p.d[i],
            q_mean: p.q_mean[i],
            q_stderr: p.q_stderr[i],
            n_pairs: p.n_pairs[i],
        })
        .collect();
    write_csv(path, &rows)
}

/// Result of a full run, with the directory it was written to.
#[derive(Debug)]
pub enum RunOutcome {
    Arealaw(ArealawOutcome),
    Correlator(Vec<CorrelatorRun>),
    Verify(VerifyReport),
}

#[derive(Debug)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub outcome: RunOutcome,
}

/// Runs the experiment described by `config` and writes all artefacts to
/// `out_dir`.
pub fn run_and_write(config: &ExperimentConfig, out_dir: &Path) -> AppResult<RunReport> {
    config.validate()?;
    let outcome = match config.kind {
        ExperimentKind::Arealaw => RunOutcome::Arealaw(run_arealaw(config)?),
        ExperimentKind::Correlator => RunOutcome::Correlator(run_correlator(config)?),
        ExperimentKind::Verify => RunOutcome::Verify(run_verify(config)?),
    };
    fs::create_dir_all(out_dir).map_err(AppError::io(out_dir))?;
    match &outcome {
        RunOutcome::Arealaw(a) => {
            write_csv(&out_dir.join("records.csv"), &a.records)?;
            write_csv(&out_dir.join("params.csv"), &a.params)?;
            write_json(&out_dir.join("summary.json"), a)?;
            if !a.control.is_empty() {
                write_csv(&out_dir.join("control.csv"), &a.control)?;
            }
        }
        RunOutcome::Correlator(runs) => {
            for run in runs {
                write_profile(&out_dir.join(format!("profiles_n{}.csv", run.n)), run)?;
            }
            write_json(&out_dir.join("fits.json"), runs)?;
        }
        RunOutcome::Verify(report) => write_json(&out_dir.join("verify.json"), report)?,
    }
    write_json(&out_dir.join("manifest.json"), &Manifest::new(config))?;
    Ok(RunReport {
        out_dir: out_dir.to_path_buf(),
        outcome,
    })
}
