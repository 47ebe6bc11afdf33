//! Writing sweep artifacts.
//!
//! ```text
//! <dir>/config.toml     the config that produced the run
//! <dir>/results.csv     one row per run
//! <dir>/results.json    config, hash, the same rows, and the summary
//! <dir>/summary.csv     mean ± std per data cell over the selected runs
//! <dir>/timings.csv     wall time per run
//! <dir>/traces/run-NNNNN.json
//! ```
//!
//! Everything except `timings.csv` is a pure function of the config.

use std::fs;
use std::path::Path;

use serde::Serialize;

use super::sweep::{ResultRow, SweepOutcome};
use crate::error::Result;

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn write_outputs(outcome: &SweepOutcome, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.toml"), outcome.config.to_toml_string()?)?;
    write_csv(&dir.join("results.csv"), &outcome.rows)?;
    write_csv(&dir.join("summary.csv"), &outcome.summary)?;
    write_csv(&dir.join("timings.csv"), &outcome.timings)?;
    write_json(&dir.join("results.json"), outcome)?;
    if !outcome.traces.is_empty() {
        fs::create_dir_all(dir.join("traces"))?;
    }
    for trace in &outcome.traces {
        let row = &outcome.rows[trace.row];
        let file = row.trace_file.as_deref().expect("traced rows name their file");
        write_json(&dir.join(file), trace)?;
    }
    Ok(())
}

pub fn read_results_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let mut reader = csv::Reader::from_path(path)?;
    let rows = reader.deserialize().collect::<std::result::Result<Vec<ResultRow>, _>>()?;
    Ok(rows)
}
