//! Marginals, spreads and confined mass computed from site densities.
//!
//! Every quantity here depends on the field only through its per-site
//! probability, so anything that preserves the density (a global phase, a
//! site-independent spin rotation) leaves them unchanged.

use serde::{Deserialize, Serialize};

use crate::error::{param, Result, WalkError};
use crate::lattice::{probability_density, stable_sum, Axis, LatticeGeometry, SpinorField};

/// Probability projected onto one axis.
pub fn axis_marginal(density: &[f64], geometry: &LatticeGeometry, axis: Axis) -> Result<Vec<f64>> {
    geometry.check_axis(axis)?;
    check_len(density, geometry)?;
    let n = geometry.size(axis);
    let stride = geometry.stride(axis);
    let mut out = vec![0.0; n];
    for (site, &p) in density.iter().enumerate() {
        out[(site / stride) % n] += p;
    }
    Ok(out)
}

fn check_len(density: &[f64], geometry: &LatticeGeometry) -> Result<()> {
    if density.len() == geometry.sites() {
        Ok(())
    } else {
        Err(WalkError::Mismatch(format!(
            "density has {} entries for {} sites",
            density.len(),
            geometry.sites()
        )))
    }
}

/// Location and spread of a periodic marginal, in lattice units.
///
/// The window used for the moments is the minimal image around the lattice
/// site closest to the circular mean, so a packet straddling the wrap is
/// measured as one packet.
fn periodic_moments(marginal: &[f64]) -> Option<(f64, f64)> {
    let n = marginal.len();
    let mass: f64 = marginal.iter().sum();
    if !(mass > 0.0) {
        return None;
    }
    let two_pi_n = std::f64::consts::TAU / n as f64;
    let (s, c) = marginal.iter().enumerate().fold((0.0, 0.0), |(s, c), (k, &p)| {
        let (sk, ck) = (two_pi_n * k as f64).sin_cos();
        (s + p * sk, c + p * ck)
    });
    let reference = ((s.atan2(c) / two_pi_n).round() as isize).rem_euclid(n as isize);
    let half = n as isize / 2;
    let (mut m1, mut m2) = (0.0, 0.0);
    for (k, &p) in marginal.iter().enumerate() {
        let d = (k as isize - reference + half).rem_euclid(n as isize) - half;
        m1 += p * d as f64;
        m2 += p * (d * d) as f64;
    }
    let mean = m1 / mass;
    let var = (m2 / mass - mean * mean).max(0.0);
    Some((reference as f64 + mean, var.sqrt()))
}

/// Population standard deviation of the physical coordinate along `axis`.
pub fn std_dev_per_axis(density: &[f64], geometry: &LatticeGeometry, axis: Axis) -> Result<f64> {
    let marginal = axis_marginal(density, geometry, axis)?;
    periodic_moments(&marginal)
        .map(|(_, sd)| sd * geometry.epsilon())
        .ok_or_else(|| WalkError::Domain("density carries no probability".into()))
}

/// Mean physical coordinate along `axis`.
pub fn mean_per_axis(density: &[f64], geometry: &LatticeGeometry, axis: Axis) -> Result<f64> {
    let marginal = axis_marginal(density, geometry, axis)?;
    let (mean_idx, _) = periodic_moments(&marginal)
        .ok_or_else(|| WalkError::Domain("density carries no probability".into()))?;
    Ok((mean_idx - geometry.origin()[axis.index()] as f64) * geometry.epsilon())
}

/// Probability with `|coordinate − center| ≤ half_width` along `axis`.
pub fn slab_mass(
    density: &[f64],
    geometry: &LatticeGeometry,
    axis: Axis,
    center: f64,
    half_width: f64,
) -> Result<f64> {
    if !(half_width >= 0.0) {
        return Err(param("half_width", format!("must be non-negative, got {half_width}")));
    }
    let marginal = axis_marginal(density, geometry, axis)?;
    let tol = 1e-9 * geometry.epsilon();
    Ok(marginal
        .iter()
        .enumerate()
        .filter(|(k, _)| (geometry.coordinate(axis, *k) - center).abs() <= half_width + tol)
        .map(|(_, p)| p)
        .sum())
}

/// Probability on sites within `shell` sites of a face of the box.
pub fn boundary_shell_mass(density: &[f64], geometry: &LatticeGeometry, shell: usize) -> f64 {
    let sizes = geometry.sizes();
    density
        .iter()
        .enumerate()
        .filter(|(site, _)| {
            let c = geometry.coords(*site);
            (0..sizes.len()).any(|a| c[a] < shell || c[a] + shell >= sizes[a])
        })
        .map(|(_, p)| p)
        .sum()
}

/// Density within this many sites of a face triggers a wrap warning.
pub const BOUNDARY_SHELL: usize = 2;
/// Shell mass above which a wrap warning is recorded.
pub const BOUNDARY_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableRecord {
    pub step: u64,
    pub time: f64,
    pub norm: f64,
    /// Mean physical coordinate per axis.
    pub mean: Vec<f64>,
    /// Standard deviation per axis, physical units.
    pub sigma: Vec<f64>,
    pub boundary_mass: f64,
}

impl ObservableRecord {
    pub fn measure(field: &SpinorField, step: u64) -> Result<Self> {
        let g = field.geometry();
        let density = probability_density(field);
        let norm = stable_sum(&density, |p| *p);
        let axes = (0..g.dims()).map(|a| Axis::from_index(a).unwrap());
        let mut mean = Vec::with_capacity(g.dims());
        let mut sigma = Vec::with_capacity(g.dims());
        for axis in axes {
            let marginal = axis_marginal(&density, g, axis)?;
            let (m, sd) = periodic_moments(&marginal)
                .ok_or_else(|| WalkError::Domain("density carries no probability".into()))?;
            mean.push((m - g.origin()[axis.index()] as f64) * g.epsilon());
            sigma.push(sd * g.epsilon());
        }
        Ok(Self {
            step,
            time: step as f64 * g.epsilon(),
            norm,
            mean,
            sigma,
            boundary_mass: boundary_shell_mass(&density, g, BOUNDARY_SHELL),
        })
    }

    /// `σ_axis / t`; undefined at `t = 0`.
    pub fn sigma_over_t(&self, axis: Axis) -> Option<f64> {
        (self.time > 0.0).then(|| self.sigma[axis.index()] / self.time)
    }
}

/// Time series of observables, one record per sampled step `j ≥ 1`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ObservableSeries {
    pub records: Vec<ObservableRecord>,
    /// Steps at which the boundary shell held more than [`BOUNDARY_THRESHOLD`].
    pub boundary_warnings: Vec<u64>,
}

impl ObservableSeries {
    pub fn push(&mut self, record: ObservableRecord, check_boundary: bool) {
        if check_boundary && record.boundary_mass > BOUNDARY_THRESHOLD {
            self.boundary_warnings.push(record.step);
        }
        self.records.push(record);
    }

    pub fn sigma(&self, axis: Axis) -> Vec<f64> {
        self.records.iter().map(|r| r.sigma[axis.index()]).collect()
    }

    pub fn sigma_over_t(&self, axis: Axis) -> Vec<f64> {
        self.records
            .iter()
            .filter_map(|r| r.sigma_over_t(axis))
            .collect()
    }

    /// Largest `|norm − 1|` over the records.
    pub fn max_norm_drift(&self) -> f64 {
        self.records
            .iter()
            .map(|r| (r.norm - 1.0).abs())
            .fold(0.0, f64::max)
    }
}
