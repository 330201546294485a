//! Periodic lattices, spinor fields on them, and Gaussian initial states.
//!
//! Sites are stored row-major with the last axis fastest, so for a 2D grid
//! the flat site index is `ix * ny + iy` and for 3D it is
//! `(ix * ny + iy) * nz + iz`. Amplitudes are stored site-major with the spin
//! component fastest: `amps[site * spin_dim + s]`.
//!
//! Spin component order is `(ψ↑, ψ↓)` for two-component walkers and
//! `(ψ¹↑, ψ¹↓, ψ²↑, ψ²↓)` for four-component walkers.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result, WalkError};

/// Chunk length used for every parallel reduction. Fixed so that sums are
/// bitwise reproducible regardless of the rayon pool size.
pub(crate) const REDUCE_CHUNK: usize = 4096;

/// Sum of `f` over a slice with a reduction order that does not depend on
/// the number of worker threads.
pub(crate) fn stable_sum<T: Sync>(data: &[T], f: impl Fn(&T) -> f64 + Sync) -> f64 {
    let partials: Vec<f64> = data
        .par_chunks(REDUCE_CHUNK)
        .map(|chunk| chunk.iter().map(&f).sum::<f64>())
        .collect();
    partials.iter().sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Axis> {
        Axis::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

/// A periodic hypercubic lattice with spacing `epsilon`, which doubles as the
/// time step of the walk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeGeometry {
    sizes: Vec<usize>,
    epsilon: f64,
    origin: Vec<usize>,
}

impl LatticeGeometry {
    /// Lattice with the physical origin on the midpoint `size / 2` of every axis.
    pub fn new(sizes: &[usize], epsilon: f64) -> Result<Self> {
        let origin = sizes.iter().map(|&n| n / 2).collect::<Vec<_>>();
        Self::with_origin(sizes, epsilon, &origin)
    }

    pub fn with_origin(sizes: &[usize], epsilon: f64, origin: &[usize]) -> Result<Self> {
        if sizes.is_empty() || sizes.len() > 3 {
            return Err(WalkError::Geometry(format!(
                "expected 1 to 3 axes, got {}",
                sizes.len()
            )));
        }
        if let Some(&n) = sizes.iter().find(|&&n| n < 2) {
            return Err(WalkError::Geometry(format!(
                "every axis needs at least 2 sites, got {n}"
            )));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(param("epsilon", format!("must be positive, got {epsilon}")));
        }
        if origin.len() != sizes.len() {
            return Err(WalkError::Geometry("origin has wrong number of axes".into()));
        }
        if origin.iter().zip(sizes).any(|(&o, &n)| o >= n) {
            return Err(WalkError::Geometry("origin lies outside the lattice".into()));
        }
        Ok(Self {
            sizes: sizes.to_vec(),
            epsilon,
            origin: origin.to_vec(),
        })
    }

    pub fn dims(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn size(&self, axis: Axis) -> usize {
        self.sizes[axis.index()]
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn origin(&self) -> &[usize] {
        &self.origin
    }

    pub fn sites(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn has_axis(&self, axis: Axis) -> bool {
        axis.index() < self.dims()
    }

    pub(crate) fn check_axis(&self, axis: Axis) -> Result<()> {
        if self.has_axis(axis) {
            Ok(())
        } else {
            Err(WalkError::Geometry(format!(
                "axis {} does not exist on a {}-axis lattice",
                axis.name(),
                self.dims()
            )))
        }
    }

    /// Distance in the flat site index between neighbours along `axis`.
    pub fn stride(&self, axis: Axis) -> usize {
        self.sizes[axis.index() + 1..].iter().product()
    }

    /// Per-axis indices of a flat site index.
    pub fn coords(&self, site: usize) -> [usize; 3] {
        let mut out = [0; 3];
        let mut rem = site;
        for a in (0..self.dims()).rev() {
            out[a] = rem % self.sizes[a];
            rem /= self.sizes[a];
        }
        out
    }

    pub fn site_index(&self, coords: &[usize]) -> usize {
        coords
            .iter()
            .zip(&self.sizes)
            .fold(0, |acc, (&c, &n)| acc * n + c)
    }

    /// Physical coordinate `(k - origin) * epsilon` of index `k` on `axis`.
    pub fn coordinate(&self, axis: Axis, k: usize) -> f64 {
        (k as f64 - self.origin[axis.index()] as f64) * self.epsilon
    }

    /// Closest site index to a physical coordinate, if it lies on the lattice.
    pub fn nearest_index(&self, axis: Axis, x: f64) -> Option<usize> {
        let k = (x / self.epsilon + self.origin[axis.index()] as f64).round();
        (k >= 0.0 && k < self.size(axis) as f64).then_some(k as usize)
    }

    /// Smallest and largest physical coordinate on `axis`.
    pub fn extent(&self, axis: Axis) -> (f64, f64) {
        (
            self.coordinate(axis, 0),
            self.coordinate(axis, self.size(axis) - 1),
        )
    }

    /// Physical length of the periodic box along `axis`.
    pub fn period(&self, axis: Axis) -> f64 {
        self.size(axis) as f64 * self.epsilon
    }
}

/// Walker state: a complex spinor of `spin_dim` components on every site.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    geometry: LatticeGeometry,
    spin_dim: usize,
    amps: Vec<Complex64>,
}

impl SpinorField {
    pub fn zeros(geometry: LatticeGeometry, spin_dim: usize) -> Result<Self> {
        if spin_dim != 2 && spin_dim != 4 {
            return Err(param("spin_dim", format!("must be 2 or 4, got {spin_dim}")));
        }
        let len = geometry.sites() * spin_dim;
        Ok(Self {
            geometry,
            spin_dim,
            amps: vec![Complex64::new(0.0, 0.0); len],
        })
    }

    pub fn from_amplitudes(
        geometry: LatticeGeometry,
        spin_dim: usize,
        amps: Vec<Complex64>,
    ) -> Result<Self> {
        let mut field = Self::zeros(geometry, spin_dim)?;
        if amps.len() != field.amps.len() {
            return Err(WalkError::Mismatch(format!(
                "expected {} amplitudes, got {}",
                field.amps.len(),
                amps.len()
            )));
        }
        field.amps = amps;
        Ok(field)
    }

    /// A single site carrying the given spinor.
    pub fn delta(geometry: LatticeGeometry, coords: &[usize], spinor: &[Complex64]) -> Result<Self> {
        let mut field = Self::zeros(geometry, spinor.len())?;
        if coords.len() != field.geometry.dims()
            || coords.iter().zip(field.geometry.sizes()).any(|(&c, &n)| c >= n)
        {
            return Err(WalkError::Domain(format!("site {coords:?} is not on the lattice")));
        }
        let site = field.geometry.site_index(coords);
        field.amps[site * field.spin_dim..(site + 1) * field.spin_dim].copy_from_slice(spinor);
        Ok(field)
    }

    pub fn geometry(&self) -> &LatticeGeometry {
        &self.geometry
    }

    pub fn spin_dim(&self) -> usize {
        self.spin_dim
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn spinor(&self, site: usize) -> &[Complex64] {
        &self.amps[site * self.spin_dim..(site + 1) * self.spin_dim]
    }

    pub fn scale(&mut self, c: Complex64) {
        self.amps.par_iter_mut().for_each(|a| *a *= c);
    }

    /// Squared norm of the amplitudes of the listed spin components.
    pub fn component_norm(&self, components: &[usize]) -> f64 {
        let sd = self.spin_dim;
        let partials: Vec<f64> = self
            .amps
            .par_chunks(REDUCE_CHUNK * sd)
            .map(|chunk| {
                chunk
                    .chunks_exact(sd)
                    .map(|sp| components.iter().map(|&s| sp[s].norm_sqr()).sum::<f64>())
                    .sum::<f64>()
            })
            .collect();
        partials.iter().sum()
    }

    /// Exchanges the amplitude buffer with `other`, which must have the same length.
    pub(crate) fn swap_buffer(&mut self, other: &mut Vec<Complex64>) {
        debug_assert_eq!(self.amps.len(), other.len());
        std::mem::swap(&mut self.amps, other);
    }
}

/// Σ over sites and spin components of |amplitude|².
pub fn total_norm(field: &SpinorField) -> f64 {
    stable_sum(&field.amps, |a| a.norm_sqr())
}

/// Per-site probability, summed over spin components.
pub fn probability_density(field: &SpinorField) -> Vec<f64> {
    field
        .amps
        .par_chunks(field.spin_dim)
        .map(|sp| sp.iter().map(|a| a.norm_sqr()).sum())
        .collect()
}

/// Gaussian wave packet: density width is the standard deviation of |ψ|² in
/// physical units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianPacketSpec {
    pub center: Vec<f64>,
    pub width: f64,
    pub polarization: Vec<Complex64>,
}

/// Samples `sqrt(n(x)) ⊗ polarization` at the site coordinates and
/// renormalizes to unit norm. Distances are not wrapped around the torus.
pub fn make_gaussian_packet(geometry: &LatticeGeometry, spec: &GaussianPacketSpec) -> Result<SpinorField> {
    let dims = geometry.dims();
    if spec.center.len() != dims {
        return Err(WalkError::Domain(format!(
            "center has {} coordinates for a {dims}-axis lattice",
            spec.center.len()
        )));
    }
    for (a, &c) in spec.center.iter().enumerate() {
        let axis = Axis::from_index(a).expect("at most 3 axes");
        let (lo, hi) = geometry.extent(axis);
        if !(c >= lo && c <= hi) {
            return Err(WalkError::Domain(format!(
                "center {c} lies outside [{lo}, {hi}] on axis {}",
                axis.name()
            )));
        }
    }
    if !(spec.width > 0.0 && spec.width.is_finite()) {
        return Err(param("width", format!("must be positive, got {}", spec.width)));
    }
    let pol_norm = spec.polarization.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !(pol_norm > 0.0 && pol_norm.is_finite()) {
        return Err(param("polarization", "must have nonzero norm"));
    }
    let pol: Vec<Complex64> = spec.polarization.iter().map(|z| z / pol_norm).collect();
    let mut field = SpinorField::zeros(geometry.clone(), pol.len())?;

    // log n(x) up to a constant; shifted by its maximum before exponentiating
    // so that very narrow packets do not underflow to an all-zero field.
    let inv = 1.0 / (2.0 * spec.width * spec.width);
    let log_n = |site: usize| -> f64 {
        let c = geometry.coords(site);
        -(0..dims)
            .map(|a| {
                let axis = Axis::from_index(a).unwrap();
                let d = geometry.coordinate(axis, c[a]) - spec.center[a];
                d * d
            })
            .sum::<f64>()
            * inv
    };
    let sites = geometry.sites();
    let max_log = (0..sites)
        .into_par_iter()
        .map(log_n)
        .reduce(|| f64::NEG_INFINITY, f64::max);

    let sd = field.spin_dim;
    field
        .amps
        .par_chunks_mut(sd)
        .enumerate()
        .for_each(|(site, sp)| {
            let amp = (0.5 * (log_n(site) - max_log)).exp();
            for (a, p) in sp.iter_mut().zip(&pol) {
                *a = p * amp;
            }
        });
    let norm = total_norm(&field);
    field.scale(Complex64::new(1.0 / norm.sqrt(), 0.0));
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn geometry_rejects_bad_input() {
        assert!(LatticeGeometry::new(&[1, 4], 0.1).is_err());
        assert!(LatticeGeometry::new(&[4, 4], 0.0).is_err());
        assert!(LatticeGeometry::new(&[4, 4], -1.0).is_err());
        assert!(LatticeGeometry::new(&[], 0.1).is_err());
        assert!(LatticeGeometry::new(&[2, 2, 2, 2], 0.1).is_err());
    }

    #[test]
    fn coordinate_round_trip() {
        let g = LatticeGeometry::new(&[7, 10, 5], 0.03).unwrap();
        for axis in Axis::ALL {
            for k in 0..g.size(axis) {
                let x = g.coordinate(axis, k);
                assert_eq!(g.nearest_index(axis, x), Some(k));
            }
        }
        for site in 0..g.sites() {
            assert_eq!(g.site_index(&g.coords(site)[..3]), site);
        }
        assert_eq!(g.coordinate(Axis::Y, 5), 0.0);
        assert_eq!(g.nearest_index(Axis::X, 1.0), None);
    }

    #[test]
    fn fig1_packet_is_normalized_and_peaked_at_center() {
        let g = LatticeGeometry::new(&[128, 128], 0.04).unwrap();
        let spec = GaussianPacketSpec {
            center: vec![g.coordinate(Axis::X, 64), g.coordinate(Axis::Y, 64)],
            width: 0.1,
            polarization: vec![c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)],
        };
        let field = make_gaussian_packet(&g, &spec).unwrap();
        assert!((total_norm(&field) - 1.0).abs() < 1e-12);
        let rho = probability_density(&field);
        let argmax = rho
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(g.coords(argmax)[..2], [64, 64]);
    }

    #[test]
    fn narrow_packet_collapses_to_nearest_site() {
        let g = LatticeGeometry::new(&[16, 16], 0.1).unwrap();
        let spec = GaussianPacketSpec {
            center: vec![0.31, -0.2],
            width: 1e-4,
            polarization: vec![c(0.0, 0.0), c(1.0, 0.0)],
        };
        let field = make_gaussian_packet(&g, &spec).unwrap();
        let rho = probability_density(&field);
        let site = g.site_index(&[11, 6]);
        assert!(rho[site] > 0.99);
        assert!((total_norm(&field) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn centered_packet_is_reflection_symmetric() {
        let g = LatticeGeometry::new(&[20, 14, 8], 0.05).unwrap();
        let spec = GaussianPacketSpec {
            center: vec![0.0; 3],
            width: 0.12,
            polarization: vec![c(1.0, 0.0), c(0.0, 1.0), c(1.0, 0.0), c(0.0, 1.0)],
        };
        let rho = probability_density(&make_gaussian_packet(&g, &spec).unwrap());
        for site in 0..g.sites() {
            let k = g.coords(site);
            for a in 0..3 {
                let mut r = k;
                let n = g.sizes()[a];
                r[a] = (2 * g.origin()[a] + n - k[a]) % n;
                let mirrored = rho[g.site_index(&r)];
                assert!((rho[site] - mirrored).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn packet_rejects_invalid_specs() {
        let g = LatticeGeometry::new(&[8, 8], 0.1).unwrap();
        let good = GaussianPacketSpec {
            center: vec![0.0, 0.0],
            width: 0.1,
            polarization: vec![c(1.0, 0.0), c(0.0, 0.0)],
        };
        let mut outside = good.clone();
        outside.center = vec![5.0, 0.0];
        assert!(matches!(make_gaussian_packet(&g, &outside), Err(WalkError::Domain(_))));
        let mut zero_pol = good.clone();
        zero_pol.polarization = vec![c(0.0, 0.0); 2];
        assert!(make_gaussian_packet(&g, &zero_pol).is_err());
        let mut bad_width = good;
        bad_width.width = 0.0;
        assert!(make_gaussian_packet(&g, &bad_width).is_err());
    }

    #[test]
    fn norm_of_zero_and_scaled_fields() {
        let g = LatticeGeometry::new(&[4, 4], 0.1).unwrap();
        let zero = SpinorField::zeros(g.clone(), 2).unwrap();
        assert_eq!(total_norm(&zero), 0.0);

        let amps = (0..32).map(|i| c(i as f64 * 0.1, 1.0 - i as f64 * 0.05)).collect();
        let mut field = SpinorField::from_amplitudes(g, 2, amps).unwrap();
        let before = total_norm(&field);
        let k = c(0.3, -1.2);
        field.scale(k);
        assert!((total_norm(&field) - k.norm_sqr() * before).abs() < 1e-12 * before);
    }

    #[test]
    fn density_of_simple_states() {
        let g = LatticeGeometry::new(&[3, 3], 0.1).unwrap();
        let field = SpinorField::delta(g.clone(), &[1, 2], &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let rho = probability_density(&field);
        for (site, &p) in rho.iter().enumerate() {
            let expected = if site == g.site_index(&[1, 2]) { 1.0 } else { 0.0 };
            assert_eq!(p, expected);
        }

        let mut amps = vec![c(0.0, 0.0); 18];
        amps[2 * g.site_index(&[0, 0])] = c(FRAC_1_SQRT_2, 0.0);
        amps[2 * g.site_index(&[2, 1]) + 1] = c(0.0, FRAC_1_SQRT_2);
        let field = SpinorField::from_amplitudes(g.clone(), 2, amps).unwrap();
        let rho = probability_density(&field);
        assert!((rho[g.site_index(&[0, 0])] - 0.5).abs() < 1e-15);
        assert!((rho[g.site_index(&[2, 1])] - 0.5).abs() < 1e-15);
        assert!((rho.iter().sum::<f64>() - total_norm(&field)).abs() < 1e-12);
    }
}
