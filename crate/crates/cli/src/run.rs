//! Drives one configured run and writes its output directory.

use std::fs;
use std::path::PathBuf;

use serde::Serialize;
use serde_json::json;
use thiserror::Error;
use wallwalk::{
    evolve, make_gaussian_packet, total_norm, EvolveOptions, ObservableSeries, Observer, StepPlan, WalkError,
};

use crate::config::{flavor_name, ConfigError, Overrides, RunConfig};
use crate::output::{write_json, write_series, SnapshotWriter};
use crate::presets::{describe, inferred_fields, preset, PRESET_NAMES};

pub const TOOL: &str = "wallwalk";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum RunError {
    #[error("configuration: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("unknown preset `{0}`; expected one of fig1, fig2, fig3, fig4")]
    UnknownPreset(String),
}

fn io_at(path: PathBuf) -> impl FnOnce(std::io::Error) -> RunError {
    move |source| RunError::Io { path, source }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub config: RunConfig,
    pub series: ObservableSeries,
    pub snapshots: Vec<String>,
    pub initial_norm: f64,
    pub final_norm: f64,
}

/// Evolves the configured packet, writing `meta.json`, `series.csv` and the
/// density snapshots into `config.out_dir`.
pub fn run(config: &RunConfig) -> Result<RunSummary, RunError> {
    config.validate()?;
    let dir = &config.out_dir;
    fs::create_dir_all(dir).map_err(io_at(dir.clone()))?;

    let geometry = config.geometry()?;
    let plan = StepPlan::new(config.flavor, &geometry, &config.params(), config.angle_mode)?;
    let initial = make_gaussian_packet(&geometry, &config.packet()?)?;
    let initial_norm = total_norm(&initial);

    let mut snapshots = SnapshotWriter::new(dir, config.snapshot_every, config.steps);
    let options = EvolveOptions {
        cadence: config.cadence,
        boundary_check: config.boundary_check,
    };
    let (field, series) = evolve(initial, &plan, config.steps, &options, &mut [&mut snapshots as &mut dyn Observer])?;
    if let Some((path, source)) = snapshots.error.take() {
        return Err(RunError::Io { path, source });
    }
    let final_norm = total_norm(&field);

    let series_path = dir.join("series.csv");
    write_series(&series_path, &series, geometry.dims()).map_err(io_at(series_path))?;

    let summary = RunSummary {
        config: config.clone(),
        series,
        snapshots: snapshots.written,
        initial_norm,
        final_norm,
    };
    let meta_path = dir.join("meta.json");
    write_json(&meta_path, &metadata(&summary)).map_err(io_at(meta_path))?;
    Ok(summary)
}

/// Resolves a preset, applies the overrides and runs it.
pub fn run_preset(name: &str, overrides: &Overrides) -> Result<RunSummary, RunError> {
    let mut config = preset(name).ok_or_else(|| RunError::UnknownPreset(name.to_string()))?;
    config.apply(overrides);
    run(&config)
}

fn metadata(summary: &RunSummary) -> serde_json::Value {
    let c = &summary.config;
    let axes = &["x", "y", "z"][..c.flavor.dims()];
    let preset_info = c.preset.as_deref().filter(|p| PRESET_NAMES.contains(p)).map(|p| {
        json!({
            "name": p,
            "description": describe(p),
            "inferred_fields": inferred_fields(p),
        })
    });
    json!({
        "tool": TOOL,
        "version": VERSION,
        "flavor": flavor_name(c.flavor),
        "config": c,
        "preset": preset_info,
        "angle_mode": c.angle_mode,
        "conventions": {
            "layout": "row-major, last axis fastest",
            "coordinates": "x = (index - size/2) * epsilon",
            "time": "t = j * epsilon",
            "wall_axis": axes[axes.len() - 1],
            "density": "probability per site",
            "sigma": "population standard deviation in physical units, minimal image around the circular mean",
            "packet_width": "standard deviation of the initial density in physical units",
            "center": "site indices",
        },
        "norm": {
            "initial": summary.initial_norm,
            "final": summary.final_norm,
            "max_drift": summary.series.max_norm_drift(),
        },
        "wrap_warnings": summary.series.boundary_warnings,
        "files": {
            "series": "series.csv",
            "density": summary.snapshots,
        },
    })
}
