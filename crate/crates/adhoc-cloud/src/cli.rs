//! Implementation of the `simulate`, `sweep` and `gen-trace` subcommands.
//! The binary in `main.rs` only parses arguments and forwards here, so every
//! behavior is reachable from library code and tests.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use thiserror::Error;

use crate::config::ExperimentConfig;
use crate::eventlog::render_log;
use crate::metrics::MetricsReport;
use crate::sim::Simulation;
use crate::trace;

/// Runs one experiment; with `out` set, writes the effective config, the
/// event log and the metrics (JSON and table) into that directory.
pub fn run_simulate(
    config_path: &Path,
    seed: Option<u64>,
    replication: Option<bool>,
    out: Option<&Path>,
) -> Result<MetricsReport> {
    let mut config = ExperimentConfig::load(config_path)
        .with_context(|| format!("loading {}", config_path.display()))?;
    if let Some(seed) = seed {
        config.run.seed = seed;
    }
    if let Some(replication) = replication {
        config.run.replication = replication;
    }
    for warning in config.timing.warnings() {
        eprintln!("warning: {warning}");
    }
    let output = Simulation::new(config.clone())?.run();
    if let Some(dir) = out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        fs::write(dir.join("config.toml"), config.to_toml())?;
        fs::write(dir.join("events.log"), render_log(&output.log))?;
        fs::write(
            dir.join("metrics.json"),
            serde_json::to_string_pretty(&output.metrics)?,
        )?;
        fs::write(dir.join("metrics.txt"), output.metrics.render_table())?;
    }
    print!("{}", output.metrics.render_table());
    Ok(output.metrics)
}

/// A malformed command-line value; distinguished from runtime failures so
/// the binary can exit with the validation code.
#[derive(Debug, Error, PartialEq)]
#[error("{0}")]
pub struct ArgumentError(pub String);

/// One `--grid KEY=V1,V2` argument: a dotted config path and its values.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAxis {
    pub key: String,
    pub values: Vec<String>,
}

pub fn parse_grid_axis(arg: &str) -> Result<GridAxis> {
    let (key, values) = arg
        .split_once('=')
        .ok_or_else(|| ArgumentError(format!("grid axis `{arg}` must look like KEY=V1,V2")))?;
    let values: Vec<String> = values.split(',').map(str::to_owned).collect();
    if key.is_empty() || values.iter().any(|v| v.is_empty()) {
        return Err(ArgumentError(format!("grid axis `{arg}` has an empty key or value")).into());
    }
    Ok(GridAxis {
        key: key.to_owned(),
        values,
    })
}

/// Inclusive seed range `A..B`.
pub fn parse_seed_range(arg: &str) -> Result<(u64, u64)> {
    let parse = || -> Option<(u64, u64)> {
        let (a, b) = arg.split_once("..")?;
        Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
    };
    let (a, b) =
        parse().ok_or_else(|| ArgumentError(format!("seed range `{arg}` must look like A..B")))?;
    if b < a {
        return Err(ArgumentError(format!("seed range `{arg}` is empty")).into());
    }
    Ok((a, b))
}

/// Sets a dotted-path key in a config to a value parsed from its string form
/// (bool, integer, float, then string, in that order).
pub fn override_config(config: &ExperimentConfig, key: &str, value: &str) -> Result<ExperimentConfig> {
    let mut root = toml::Value::try_from(config).context("serializing config")?;
    let mut node = &mut root;
    let parts: Vec<&str> = key.split('.').collect();
    for part in &parts[..parts.len() - 1] {
        node = node
            .get_mut(part)
            .ok_or_else(|| ArgumentError(format!("unknown config key `{key}`")))?;
    }
    let leaf = parts.last().expect("non-empty key");
    let table = node
        .as_table_mut()
        .ok_or_else(|| ArgumentError(format!("`{key}` does not address a config field")))?;
    if !table.contains_key(*leaf) {
        return Err(ArgumentError(format!("unknown config key `{key}`")).into());
    }
    let parsed = if let Ok(b) = value.parse::<bool>() {
        toml::Value::Boolean(b)
    } else if let Ok(i) = value.parse::<i64>() {
        toml::Value::Integer(i)
    } else if let Ok(f) = value.parse::<f64>() {
        toml::Value::Float(f)
    } else {
        toml::Value::String(value.to_owned())
    };
    table.insert((*leaf).to_owned(), parsed);
    let config: ExperimentConfig = root.try_into().context("applying override")?;
    config.validate()?;
    Ok(config)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRun {
    pub seed: u64,
    pub overrides: Vec<(String, String)>,
    pub metrics: MetricsReport,
}

/// Runs the full cross product of grid values and seeds. With `out` set,
/// each run's metrics land in `runs/NNN/` plus a `manifest.json` at the top.
pub fn run_sweep(
    config_path: &Path,
    seeds: (u64, u64),
    grid: &[GridAxis],
    out: Option<&Path>,
) -> Result<Vec<SweepRun>> {
    if grid.is_empty() {
        return Err(ArgumentError("at least one --grid axis is required".into()).into());
    }
    let base = ExperimentConfig::load(config_path)
        .with_context(|| format!("loading {}", config_path.display()))?;
    let mut combos: Vec<Vec<(String, String)>> = vec![Vec::new()];
    for axis in grid {
        combos = combos
            .iter()
            .flat_map(|combo| {
                axis.values.iter().map(move |v| {
                    let mut next = combo.clone();
                    next.push((axis.key.clone(), v.clone()));
                    next
                })
            })
            .collect();
    }
    let mut runs = Vec::new();
    for combo in &combos {
        let mut config = base.clone();
        for (key, value) in combo {
            config = override_config(&config, key, value)?;
        }
        for seed in seeds.0..=seeds.1 {
            let mut config = config.clone();
            config.run.seed = seed;
            let output = Simulation::new(config)?.run();
            let label: Vec<String> = combo.iter().map(|(k, v)| format!("{k}={v}")).collect();
            println!(
                "seed={seed} {} completion_rate={:.4} restores={} continuity_losses={}",
                label.join(" "),
                output.metrics.completion_rate,
                output.metrics.restores,
                output.metrics.continuity_losses,
            );
            runs.push(SweepRun {
                seed,
                overrides: combo.clone(),
                metrics: output.metrics,
            });
        }
    }
    if let Some(dir) = out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (i, run) in runs.iter().enumerate() {
            let run_dir = dir.join("runs").join(format!("{i:03}"));
            fs::create_dir_all(&run_dir)?;
            fs::write(
                run_dir.join("metrics.json"),
                serde_json::to_string_pretty(&run.metrics)?,
            )?;
        }
        fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&runs)?)?;
    }
    Ok(runs)
}

pub fn run_gen_trace(
    hosts: usize,
    horizon: f64,
    mtbf: f64,
    mttr: f64,
    seed: u64,
    out: &Path,
) -> Result<()> {
    let trace = trace::generate_trace(hosts, horizon, mtbf, mttr, seed)?;
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    trace::save_trace(&trace, out)?;
    println!(
        "wrote {} events for {} hosts to {}",
        trace.events.len(),
        trace.hosts.len(),
        out.display()
    );
    Ok(())
}
