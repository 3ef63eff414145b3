use std::fs;
use std::io;
use std::path::Path;

use mediatopo::experiments::Table;
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::run::Outcome;

/// Floats are written with Rust's shortest round-trip formatting, so equal
/// values always produce equal bytes.
fn write_table(path: &Path, table: &Table) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    if !table.columns.is_empty() {
        w.write_record(&table.columns)?;
    }
    for row in &table.rows {
        w.write_record(row.iter().map(|x| x.to_string()))?;
    }
    w.flush()
}

pub fn results_document(config: &ExperimentConfig, seed: u64, results: Value) -> Value {
    json!({
        "metadata": {
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "task": config.task,
            "seed": seed,
            "config": config,
        },
        "results": results,
    })
}

pub fn write_all(dir: &Path, config: &ExperimentConfig, seed: u64, outcome: Outcome) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let doc = results_document(config, seed, outcome.results);
    let mut text = serde_json::to_string_pretty(&doc).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(dir.join("results.json"), text)?;
    write_table(&dir.join("spectra.csv"), &outcome.artifacts.spectra)?;
    write_table(&dir.join("profiles.csv"), &outcome.artifacts.profiles)?;
    if let Some((name, script)) = outcome.plot {
        fs::write(dir.join(name), script)?;
    }
    Ok(())
}
