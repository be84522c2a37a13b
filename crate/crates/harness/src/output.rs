//! Result serialization: the MSE table as CSV, a JSON metadata sidecar, and
//! a log-scale series file for plotting tools.

use std::path::Path;

use serde::Serialize;

use crate::error::{HarnessError, Result};
use crate::mse::{MseRow, MseTable};

pub const CSV_HEADER: &str = "snr_db,estimator,mse_deg2,trials,failed_trials";

pub fn render_csv(table: &MseTable) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in &table.rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.snr_db, row.estimator, row.mse_deg2, row.trials, row.failed_trials
        ));
    }
    out
}

pub fn parse_csv(text: &str) -> Result<MseTable> {
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header.trim() == CSV_HEADER => {}
        other => {
            return Err(HarnessError::Parse(format!(
                "unexpected header {other:?} (want '{CSV_HEADER}')"
            )))
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(HarnessError::Parse(format!(
                "line {}: expected 5 fields, got {}",
                idx + 2,
                fields.len()
            )));
        }
        let parse_f = |s: &str| -> Result<f64> {
            s.trim()
                .parse()
                .map_err(|e| HarnessError::Parse(format!("line {}: {e}", idx + 2)))
        };
        let parse_u = |s: &str| -> Result<usize> {
            s.trim()
                .parse()
                .map_err(|e| HarnessError::Parse(format!("line {}: {e}", idx + 2)))
        };
        rows.push(MseRow {
            snr_db: parse_f(fields[0])?,
            estimator: fields[1].trim().to_string(),
            mse_deg2: parse_f(fields[2])?,
            trials: parse_u(fields[3])?,
            failed_trials: parse_u(fields[4])?,
        });
    }
    Ok(MseTable { rows })
}

/// One `(snr_db, log10 mse)` series per estimator, for generic plotting tools.
pub fn render_plot_data(table: &MseTable) -> String {
    let mut out = String::from("estimator,snr_db,log10_mse_deg2\n");
    let mut names: Vec<&str> = table.rows.iter().map(|r| r.estimator.as_str()).collect();
    names.sort_unstable();
    names.dedup();
    for name in names {
        for row in table.rows.iter().filter(|r| r.estimator == name) {
            out.push_str(&format!(
                "{},{},{}\n",
                name,
                row.snr_db,
                row.mse_deg2.log10()
            ));
        }
    }
    out
}

/// Run provenance written next to the CSV.
#[derive(Debug, Serialize)]
pub struct RunMetadata {
    pub config: serde_json::Value,
    pub master_seed: u64,
    pub crate_version: String,
    pub wall_seconds: f64,
    pub finished_unix_seconds: u64,
    pub warnings: Vec<String>,
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_results(
    table: &MseTable,
    metadata: &RunMetadata,
    out_dir: &Path,
    plot_data: bool,
) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(|source| HarnessError::Io {
        path: out_dir.display().to_string(),
        source,
    })?;
    write_text(&out_dir.join("results.csv"), &render_csv(table))?;
    let json = serde_json::to_string_pretty(metadata)?;
    write_text(&out_dir.join("results_meta.json"), &json)?;
    if plot_data {
        write_text(&out_dir.join("plot_data.csv"), &render_plot_data(table))?;
    }
    Ok(())
}
