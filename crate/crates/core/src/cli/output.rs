//! Trial CSV, summary JSON and the run manifest.
//!
//! The CSV starts with `#` comment lines holding the tool version and the exact
//! config as one line of JSON. Nothing time- or path-dependent goes into the CSV,
//! so rerunning the embedded config reproduces the file byte for byte; start and
//! end times and output paths live in the manifest written next to the summary.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::{ExperimentConfig, SummaryReport, TrialRecord};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const CSV_COLUMNS: [&str; 23] = [
    "trial",
    "seed",
    "n",
    "lambda1_over_bn",
    "lambda2_over_bn",
    "lambdan_over_bn",
    "max_abs_over_bn",
    "phase",
    "gamma_over_bn",
    "gap_over_bn",
    "x_n",
    "log_z_quadrature",
    "log_z_laplace",
    "t_n",
    "sumsq_over_bn2",
    "trace_over_bn",
    "big_count",
    "moment",
    "saddle_residual",
    "bracket_ok",
    "identity_error",
    "whp_flags",
    "failure",
];

const CONFIG_PREFIX: &str = "# config: ";
const VERSION_PREFIX: &str = "# levy-ssk ";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub version: String,
    pub master_seed: u64,
    pub started_at: String,
    pub finished_at: String,
    pub outputs: Vec<String>,
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn row(r: &TrialRecord) -> Vec<String> {
    let opt = |v: Option<String>| v.unwrap_or_default();
    vec![
        r.trial.to_string(),
        r.seed.to_string(),
        r.n.to_string(),
        fmt_f64(r.lambda1_over_bn),
        fmt_f64(r.lambda2_over_bn),
        fmt_f64(r.lambdan_over_bn),
        fmt_f64(r.max_abs_over_bn),
        opt(r.phase.map(|p| p.as_str().to_string())),
        fmt_f64(r.gamma_over_bn),
        fmt_f64(r.gap_over_bn),
        fmt_f64(r.x_n),
        fmt_f64(r.log_z_quadrature),
        fmt_f64(r.log_z_laplace),
        fmt_f64(r.t_n),
        fmt_f64(r.sumsq_over_bn2),
        fmt_f64(r.trace_over_bn),
        opt(r.big_count.map(|c| c.to_string())),
        fmt_f64(r.moment),
        fmt_f64(r.saddle_residual),
        opt(r.bracket_ok.map(|b| b.to_string())),
        fmt_f64(r.identity_error),
        r.whp_flags.clone(),
        opt(r.failure.clone()),
    ]
}

/// The trials CSV, comment header included.
pub fn trials_csv(cfg: &ExperimentConfig, records: &[TrialRecord]) -> Result<String> {
    let mut buf = format!("{VERSION_PREFIX}{VERSION}\n{CONFIG_PREFIX}{}\n", serde_json::to_string(cfg)?).into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(CSV_COLUMNS).map_err(csv_error)?;
        for r in records {
            w.write_record(row(r)).map_err(csv_error)?;
        }
        w.flush()?;
    }
    String::from_utf8(buf).map_err(|e| Error::input(e.to_string()))
}

fn csv_error(e: csv::Error) -> Error {
    Error::input(format!("csv: {e}"))
}

#[derive(Serialize)]
struct SummaryFile<'a> {
    manifest: &'a RunManifest,
    report: &'a SummaryReport,
}

pub fn summary_json(manifest: &RunManifest, report: &SummaryReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(&SummaryFile { manifest, report })?)
}

/// Reads a config from a plain config file, a trials CSV or a summary JSON.
pub fn load_config(text: &str) -> Result<ExperimentConfig> {
    if text.starts_with('#') {
        let line = text
            .lines()
            .take_while(|l| l.starts_with('#'))
            .find_map(|l| l.strip_prefix(CONFIG_PREFIX))
            .ok_or_else(|| Error::input("CSV header carries no embedded config"))?;
        return ExperimentConfig::from_json(line);
    }
    let value: serde_json::Value = serde_json::from_str(text)?;
    match value.get("manifest").and_then(|m| m.get("config")) {
        Some(cfg) => {
            let cfg: ExperimentConfig = serde_json::from_value(cfg.clone())?;
            cfg.validate()?;
            Ok(cfg)
        }
        None => {
            let cfg: ExperimentConfig = serde_json::from_value(value)?;
            cfg.validate()?;
            Ok(cfg)
        }
    }
}
