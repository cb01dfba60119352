//! Flat-file outputs: CSV tables and the run manifest.

use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ScenarioConfig;
use crate::error::{CliError, Result};
use crate::runner::RunOutput;

pub const RESULTS_FILE: &str = "results.csv";
pub const MANIFEST_FILE: &str = "manifest.txt";

/// CSV bytes with a header row even when `rows` is empty.
pub fn to_csv<T: Serialize>(rows: &[T], header: &[&str]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.into_inner()
        .map_err(|e| CliError::Csv(csv::Error::from(e.into_error())))
}

pub const RESULT_HEADER: [&str; 11] = [
    "scenario",
    "e_max",
    "N",
    "policy",
    "G_analytic",
    "G_simulated",
    "std_error",
    "G_ub",
    "g_ideal",
    "wall_time",
    "error",
];
const POLICY_HEADER: [&str; 5] = ["index", "lower", "upper", "action", "consumption"];
const SIMULATION_HEADER: [&str; 9] = [
    "scenario",
    "e_max",
    "N",
    "policy",
    "frames",
    "seed",
    "G_analytic",
    "G_simulated",
    "std_error",
];
const BOUND_HEADER: [&str; 7] = [
    "scenario",
    "e_max",
    "b",
    "p_b",
    "beta_star",
    "a_star",
    "quantized_increment",
];

/// SHA-256 of the canonical TOML form of `config`.
pub fn config_hash(config: &ScenarioConfig) -> Result<String> {
    Ok(hex::encode(Sha256::digest(config.to_toml()?.as_bytes())))
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Writes every table of `out` into `dir` together with the manifest.
pub fn write_run(
    dir: &Path,
    command: &str,
    config: &ScenarioConfig,
    out: &RunOutput,
) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    write(dir, RESULTS_FILE, &to_csv(&out.rows, &RESULT_HEADER)?)?;
    for table in &out.policies {
        write(dir, &table.file_name, &to_csv(&table.rows, &POLICY_HEADER)?)?;
    }
    if !out.simulations.is_empty() {
        write(
            dir,
            "simulation.csv",
            &to_csv(&out.simulations, &SIMULATION_HEADER)?,
        )?;
    }
    if !out.bounds.is_empty() {
        write(dir, "bound.csv", &to_csv(&out.bounds, &BOUND_HEADER)?)?;
    }
    write(dir, "config.toml", config.to_toml()?.as_bytes())?;
    let manifest = format!(
        "command = {command}\nscenario = {}\nconfig_sha256 = {}\nseed = {}\nehd-cli = {}\nehd-core = {}\n",
        config.name,
        config_hash(config)?,
        config.seed,
        env!("CARGO_PKG_VERSION"),
        ehd_core::VERSION,
    );
    write(dir, MANIFEST_FILE, manifest.as_bytes())
}
