//! Walk-versus-continuum error as the lattice spacing shrinks.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dirac::{DiracFrame, DiracOperator2d};
use crate::coin::{AngleMode, DomainWallParams};
use crate::engine::{evolve, EvolveOptions, Flavor, StepPlan};
use crate::error::{param, Result, WalkError};
use crate::lattice::{make_gaussian_packet, probability_density, Axis, GaussianPacketSpec, LatticeGeometry};

/// Everything that defines one convergence study. All lengths are physical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSetup {
    pub packet: GaussianPacketSpec,
    /// Wall shape; its `epsilon` is replaced by each walk spacing in turn.
    pub wall: DomainWallParams,
    /// Side lengths of the periodic box.
    pub domain: [f64; 2],
    /// Walk lattice spacings, coarsest first.
    pub epsilons: Vec<f64>,
    /// Grid spacing of the reference solver; a multiple of every walk spacing.
    pub reference_spacing: f64,
    pub reference_dt: f64,
    pub t_final: f64,
}

impl ConvergenceSetup {
    /// The desk-scale study: a 10.24 × 10.24 box, a 128² reference grid and
    /// walk spacings 0.08 down to 0.01.
    pub fn standard() -> Self {
        Self {
            packet: GaussianPacketSpec {
                center: vec![0.0, 0.0],
                width: 0.5,
                polarization: vec![num_complex::Complex64::new(0.0, 0.0), num_complex::Complex64::new(1.0, 0.0)],
            },
            wall: DomainWallParams {
                mass: 0.5,
                lambda: 60.0,
                coupling: 70.0,
                epsilon: 0.08,
            },
            domain: [10.24, 10.24],
            epsilons: vec![0.08, 0.04, 0.02, 0.01],
            reference_spacing: 0.08,
            reference_dt: 0.008,
            t_final: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub epsilon: f64,
    pub sizes: Vec<usize>,
    pub steps: u64,
    /// `‖ρ_walk − ρ_ref‖₂` on the reference grid.
    pub error: f64,
    pub walk_norm_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRun {
    pub sizes: Vec<usize>,
    pub spacing: f64,
    pub dt: f64,
    pub steps: usize,
    pub norm_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub setup: ConvergenceSetup,
    pub reference: ReferenceRun,
    pub rows: Vec<ConvergenceRow>,
    /// `error[i] / error[i + 1]`.
    pub ratios: Vec<f64>,
    /// `log(error ratio) / log(spacing ratio)`.
    pub orders: Vec<f64>,
    /// Errors never increase as the spacing shrinks.
    pub monotone: bool,
}

/// Number of whole cells of size `spacing` in `length`.
fn whole(length: f64, spacing: f64, what: &str) -> Result<usize> {
    let n = length / spacing;
    let r = n.round();
    if r < 1.0 || (n - r).abs() > 1e-9 * n.max(1.0) {
        return Err(WalkError::Mismatch(format!(
            "{what}: {length} is not a whole multiple of {spacing}"
        )));
    }
    Ok(r as usize)
}

fn geometry_for(domain: &[f64; 2], spacing: f64) -> Result<LatticeGeometry> {
    let nx = whole(domain[0], spacing, "domain")?;
    let ny = whole(domain[1], spacing, "domain")?;
    LatticeGeometry::new(&[nx, ny], spacing)
}

/// Fine-grid site of every reference-grid site, or an error if the two
/// grids do not share points.
fn sample_map(coarse: &LatticeGeometry, fine: &LatticeGeometry) -> Result<Vec<usize>> {
    let tol = 1e-9 * fine.epsilon();
    let mut per_axis = Vec::new();
    for axis in [Axis::X, Axis::Y] {
        let mut idx = Vec::with_capacity(coarse.size(axis));
        for k in 0..coarse.size(axis) {
            let x = coarse.coordinate(axis, k);
            let j = fine
                .nearest_index(axis, x)
                .filter(|&j| (fine.coordinate(axis, j) - x).abs() < tol)
                .ok_or_else(|| {
                    WalkError::Mismatch(format!(
                        "reference point {x} on {} is not a site of the ε = {} lattice",
                        axis.name(),
                        fine.epsilon()
                    ))
                })?;
            idx.push(j);
        }
        per_axis.push(idx);
    }
    Ok((0..coarse.sites())
        .map(|s| {
            let c = coarse.coords(s);
            fine.site_index(&[per_axis[0][c[0]], per_axis[1][c[1]]])
        })
        .collect())
}

/// Runs the walk at every spacing and the walk-frame reference once, and
/// compares densities at `t_final`.
pub fn convergence_study(setup: &ConvergenceSetup) -> Result<ConvergenceTable> {
    setup.wall.validate()?;
    if setup.epsilons.is_empty() {
        return Err(param("epsilons", "need at least one spacing"));
    }
    if !(setup.t_final >= 0.0 && setup.t_final.is_finite()) {
        return Err(param("t_final", "must be finite and non-negative"));
    }
    let reference_geometry = geometry_for(&setup.domain, setup.reference_spacing)?;
    let mut plans = Vec::new();
    for &eps in &setup.epsilons {
        let geometry = geometry_for(&setup.domain, eps)?;
        let map = sample_map(&reference_geometry, &geometry)?;
        let steps = whole(setup.t_final, eps, "t_final").or_else(|e| {
            if setup.t_final == 0.0 {
                Ok(0)
            } else {
                Err(e)
            }
        })?;
        plans.push((eps, geometry, map, steps as u64));
    }

    let run_reference = || -> Result<(Vec<f64>, ReferenceRun)> {
        let op = DiracOperator2d::new(DiracFrame::Walk, &reference_geometry, &setup.wall)?;
        let initial = make_gaussian_packet(&reference_geometry, &setup.packet)?;
        let run = op.evolve(&initial, setup.t_final, setup.reference_dt)?;
        let area = setup.reference_spacing * setup.reference_spacing;
        let rho = probability_density(&run.field).into_iter().map(|p| p / area).collect();
        Ok((
            rho,
            ReferenceRun {
                sizes: reference_geometry.sizes().to_vec(),
                spacing: setup.reference_spacing,
                dt: run.dt,
                steps: run.steps,
                norm_drift: run.norm_drift,
            },
        ))
    };
    let run_walks = || -> Result<Vec<(Vec<f64>, f64)>> {
        plans
            .par_iter()
            .map(|(eps, geometry, map, steps)| {
                let wall = DomainWallParams {
                    epsilon: *eps,
                    ..setup.wall
                };
                let plan = StepPlan::new(Flavor::TwoD, geometry, &wall, AngleMode::Physical)?;
                let initial = make_gaussian_packet(geometry, &setup.packet)?;
                let options = EvolveOptions {
                    cadence: (*steps).max(1),
                    boundary_check: false,
                };
                let (field, series) = evolve(initial, &plan, *steps, &options, &mut [])?;
                let p = probability_density(&field);
                let area = eps * eps;
                Ok((map.iter().map(|&s| p[s] / area).collect(), series.max_norm_drift()))
            })
            .collect()
    };
    let (reference, walks) = rayon::join(run_reference, run_walks);
    let (rho_ref, reference) = reference?;
    let walks = walks?;

    let area = setup.reference_spacing * setup.reference_spacing;
    let rows: Vec<ConvergenceRow> = plans
        .iter()
        .zip(walks)
        .map(|((eps, geometry, _, steps), (rho, drift))| {
            let sq: f64 = rho.iter().zip(&rho_ref).map(|(a, b)| (a - b) * (a - b)).sum();
            ConvergenceRow {
                epsilon: *eps,
                sizes: geometry.sizes().to_vec(),
                steps: *steps,
                error: (sq * area).sqrt(),
                walk_norm_drift: drift,
            }
        })
        .collect();
    let ratios: Vec<f64> = rows.windows(2).map(|w| w[0].error / w[1].error).collect();
    let orders = rows
        .windows(2)
        .zip(&ratios)
        .map(|(w, r)| r.ln() / (w[0].epsilon / w[1].epsilon).ln())
        .collect();
    let monotone = rows.windows(2).all(|w| w[1].error <= w[0].error);
    Ok(ConvergenceTable {
        setup: setup.clone(),
        reference,
        rows,
        ratios,
        orders,
        monotone,
    })
}
