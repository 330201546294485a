//! Built-in runs: two 2D wall studies and two 3D spreading runs.
//!
//! Grid sizes, packet widths and the 3D spacing are inferred; they are
//! listed per preset in [`inferred_fields`].

use std::f64::consts::FRAC_1_SQRT_2;
use std::path::PathBuf;

use wallwalk::{AngleMode, Flavor};

use crate::config::RunConfig;

pub const PRESET_NAMES: [&str; 4] = ["fig1", "fig2", "fig3", "fig4"];

/// Mass of the localized fig2 run, also used by the regression baseline.
pub const FIG2_MASS: f64 = 1.5;

/// One-line description shown by `--help` and written to the metadata.
pub fn describe(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig1" => {
            "2D density at t = 10 read as physical time (250 steps at ε = 0.04); \
             pass --steps 10 for the ten-step reading"
        }
        "fig2" => "2D σ/t curves at ε = 0.02, localized mass; override --mass 0 for the free walk",
        "fig3" => "3D massless spreading from a symmetric packet, 12 steps",
        "fig4" => "3D confinement to the wall plane, λ = 90, h = 4, m = 11, 20 steps",
        _ => return None,
    })
}

/// Fields of a preset whose values were inferred rather than given.
pub fn inferred_fields(name: &str) -> &'static [&'static str] {
    match name {
        "fig1" => &["sizes", "mass"],
        "fig2" => &["sizes", "width", "steps", "mass"],
        "fig3" | "fig4" => &["sizes", "epsilon", "width"],
        _ => &[],
    }
}

pub fn preset(name: &str) -> Option<RunConfig> {
    let h = FRAC_1_SQRT_2;
    let base = RunConfig {
        preset: Some(name.to_string()),
        flavor: Flavor::TwoD,
        sizes: vec![128, 128],
        epsilon: 0.04,
        steps: 250,
        mass: 2.0,
        lambda: 60.0,
        coupling: 70.0,
        center: vec![64.0, 64.0],
        width: 0.1,
        polarization: vec![[h, 0.0], [h, 0.0]],
        cadence: 1,
        snapshot_every: 0,
        angle_mode: AngleMode::Physical,
        boundary_check: true,
        out_dir: PathBuf::from(format!("runs/{name}")),
    };
    Some(match name {
        "fig1" => base,
        "fig2" => RunConfig {
            sizes: vec![256, 256],
            epsilon: 0.02,
            steps: 80,
            mass: FIG2_MASS,
            center: vec![128.0, 128.0],
            polarization: vec![[0.0, 0.0], [1.0, 0.0]],
            ..base
        },
        "fig3" => RunConfig {
            flavor: Flavor::ThreeD,
            sizes: vec![64, 64, 64],
            epsilon: 0.1,
            steps: 12,
            mass: 0.0,
            center: vec![32.0, 32.0, 32.0],
            width: 0.2,
            polarization: vec![[0.5, 0.0], [0.0, 0.5], [0.5, 0.0], [0.0, 0.5]],
            ..base
        },
        "fig4" => RunConfig {
            flavor: Flavor::ThreeD,
            sizes: vec![64, 64, 64],
            epsilon: 0.1,
            steps: 20,
            mass: 11.0,
            lambda: 90.0,
            coupling: 4.0,
            center: vec![32.0, 32.0, 32.0],
            width: 0.2,
            polarization: vec![[0.0, 0.0], [h, 0.0], [0.0, 0.0], [h, 0.0]],
            ..base
        },
        _ => return None,
    })
}
