//! CSV and JSON output for density sweeps.
//!
//! CSV columns are fixed: `m, rho, density, lo, hi, reference, remainder`.
//! Reals are written in shortest round-trip exponent form, so identical runs
//! give byte-identical files. When a power fails, the rows computed before it
//! are kept and a marker row follows with `FAILED` in the density column and
//! the error message in the last column.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::density::{DensityReport, SweepResult};
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 7] = ["m", "rho", "density", "lo", "hi", "reference", "remainder"];
pub const FAILURE_MARKER: &str = "FAILED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// The power at which a sweep stopped.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepFailure {
    pub m: u64,
    pub rho: f64,
    pub message: String,
}

/// Everything a sweep writes out.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepOutput {
    #[serde(flatten)]
    pub result: SweepResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<SweepFailure>,
}

impl SweepOutput {
    /// Keep the reports up to the first failure.
    pub fn from_results(rho: f64, m_list: &[u64], results: Vec<Result<DensityReport>>) -> Self {
        let mut reports = Vec::with_capacity(results.len());
        let mut failure = None;
        for (&m, r) in m_list.iter().zip(results) {
            match r {
                Ok(report) => reports.push(report),
                Err(e) => {
                    failure = Some(SweepFailure {
                        m,
                        rho,
                        message: e.to_string(),
                    });
                    break;
                }
            }
        }
        Self {
            result: SweepResult::from_reports(reports),
            failure,
        }
    }
}

fn real(x: f64) -> String {
    format!("{x:e}")
}

fn csv_error(e: csv::Error) -> Error {
    Error::InvalidInput(format!("csv output: {e}"))
}

pub fn write_csv<W: Write>(out: W, sweep: &SweepOutput) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(csv_error)?;
    for r in &sweep.result.reports {
        w.write_record([
            r.m.to_string(),
            real(r.rho),
            real(r.density),
            real(r.interval.0),
            real(r.interval.1),
            real(r.reference),
            real(r.remainder),
        ])
        .map_err(csv_error)?;
    }
    if let Some(f) = &sweep.failure {
        w.write_record([
            f.m.to_string(),
            real(f.rho),
            FAILURE_MARKER.to_string(),
            String::new(),
            String::new(),
            String::new(),
            f.message.clone(),
        ])
        .map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::InvalidInput(e.to_string()))?;
    Ok(())
}

pub fn write_json<W: Write>(mut out: W, sweep: &SweepOutput) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, sweep)
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    writeln!(out).map_err(|e| Error::InvalidInput(e.to_string()))?;
    Ok(())
}

pub fn write_sweep<W: Write>(out: W, sweep: &SweepOutput, format: OutputFormat) -> Result<()> {
    match format {
        OutputFormat::Csv => write_csv(out, sweep),
        OutputFormat::Json => write_json(out, sweep),
    }
}
