//! Full walk steps, time evolution, and the dense one-step operator.
//!
//! Operators are applied right to left: for the two-dimensional walk
//! `U = S_y Q⁺ S_x Q⁻`, so `Q⁻` acts first; for the three-dimensional walk
//! `U = Θ 𝒮^z ℛ_z 𝒮^x ℛ_x 𝒮^y ℛ_y`, so `ℛ_y` acts first. One call to
//! [`step`] maps `Ψ_j` to `Ψ_{j+1}`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coin::{angle_table, coin_q, rotation_set, x_rotation, AngleMode, Coin2x2, DomainWallParams, RotationSet};
use crate::error::{Result, WalkError};
use crate::lattice::{Axis, LatticeGeometry, SpinorField};
use crate::observables::{ObservableRecord, ObservableSeries};
use crate::shift::{displacements, shift_into};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flavor {
    #[serde(rename = "2d")]
    TwoD,
    #[serde(rename = "3d")]
    ThreeD,
}

impl Flavor {
    pub fn dims(self) -> usize {
        match self {
            Flavor::TwoD => 2,
            Flavor::ThreeD => 3,
        }
    }

    pub fn spin_dim(self) -> usize {
        match self {
            Flavor::TwoD => 2,
            Flavor::ThreeD => 4,
        }
    }

    /// The axis along which the wall varies: `y` in 2D, `z` in 3D.
    pub fn confining_axis(self) -> Axis {
        match self {
            Flavor::TwoD => Axis::Y,
            Flavor::ThreeD => Axis::Z,
        }
    }
}

/// One factor of the step operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubOp {
    /// `Q⁺` (`+1`) or `Q⁻` (`-1`) on the two-component spinor.
    CoinQ(i32),
    /// `S^axis` in 2D, `diag(S^axis, S^axis†)` in 3D.
    Shift(Axis),
    /// `diag(R_axis, R_axis)`.
    Rotation(Axis),
    /// `Θ = exp(iθ̄ε σ_x) ⊗ 𝕀₂`.
    Coupling,
}

const OPS_2D: [SubOp; 4] = [SubOp::CoinQ(-1), SubOp::Shift(Axis::X), SubOp::CoinQ(1), SubOp::Shift(Axis::Y)];
const OPS_3D: [SubOp; 7] = [
    SubOp::Rotation(Axis::Y),
    SubOp::Shift(Axis::Y),
    SubOp::Rotation(Axis::X),
    SubOp::Shift(Axis::X),
    SubOp::Rotation(Axis::Z),
    SubOp::Shift(Axis::Z),
    SubOp::Coupling,
];

/// Everything needed to apply one walk step to a field on a given lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct StepPlan {
    flavor: Flavor,
    geometry: LatticeGeometry,
    epsilon: f64,
    /// θ̄ per slice along the confining axis.
    angles: Vec<f64>,
    rotations: RotationSet,
    q_plus: Vec<Coin2x2>,
    q_minus: Vec<Coin2x2>,
    coupling: Vec<Coin2x2>,
}

impl StepPlan {
    /// Plan for the wall profile of `params` on `geometry`.
    pub fn new(flavor: Flavor, geometry: &LatticeGeometry, params: &DomainWallParams, mode: AngleMode) -> Result<Self> {
        params.validate()?;
        if (params.epsilon - geometry.epsilon()).abs() > 1e-12 * geometry.epsilon() {
            return Err(WalkError::Mismatch(format!(
                "wall parameters use epsilon {} but the lattice has {}",
                params.epsilon,
                geometry.epsilon()
            )));
        }
        Self::check_geometry(flavor, geometry)?;
        let angles = angle_table(params, geometry, flavor.confining_axis(), mode);
        Self::with_angles(flavor, geometry, angles)
    }

    /// Plan with an explicit θ̄ table along the confining axis.
    pub fn with_angles(flavor: Flavor, geometry: &LatticeGeometry, angles: Vec<f64>) -> Result<Self> {
        Self::check_geometry(flavor, geometry)?;
        let n = geometry.size(flavor.confining_axis());
        if angles.len() != n {
            return Err(WalkError::Mismatch(format!(
                "angle table has {} entries, confining axis has {n} slices",
                angles.len()
            )));
        }
        let mut plan = Self {
            flavor,
            geometry: geometry.clone(),
            epsilon: geometry.epsilon(),
            angles,
            rotations: rotation_set(),
            q_plus: Vec::new(),
            q_minus: Vec::new(),
            coupling: Vec::new(),
        };
        plan.build_coins();
        Ok(plan)
    }

    /// Constant θ̄ on every site.
    pub fn uniform(flavor: Flavor, geometry: &LatticeGeometry, theta_bar: f64) -> Result<Self> {
        Self::check_geometry(flavor, geometry)?;
        let n = geometry.size(flavor.confining_axis());
        Self::with_angles(flavor, geometry, vec![theta_bar; n])
    }

    /// Replace the 3D rotation set.
    pub fn with_rotations(mut self, rotations: RotationSet) -> Self {
        self.rotations = rotations;
        self
    }

    fn check_geometry(flavor: Flavor, geometry: &LatticeGeometry) -> Result<()> {
        if geometry.dims() != flavor.dims() {
            return Err(WalkError::Mismatch(format!(
                "{:?} walk needs {} axes, lattice has {}",
                flavor,
                flavor.dims(),
                geometry.dims()
            )));
        }
        Ok(())
    }

    fn build_coins(&mut self) {
        let eps = self.epsilon;
        self.q_plus = self.angles.iter().map(|&t| coin_q(1, t, eps)).collect();
        self.q_minus = self.angles.iter().map(|&t| coin_q(-1, t, eps)).collect();
        self.coupling = self.angles.iter().map(|&t| x_rotation(t * eps)).collect();
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn geometry(&self) -> &LatticeGeometry {
        &self.geometry
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn rotations(&self) -> &RotationSet {
        &self.rotations
    }

    /// Sub-operations in the order they act on the state.
    pub fn ops(&self) -> &'static [SubOp] {
        match self.flavor {
            Flavor::TwoD => &OPS_2D,
            Flavor::ThreeD => &OPS_3D,
        }
    }

    fn rotation(&self, axis: Axis) -> &Coin2x2 {
        match axis {
            Axis::X => &self.rotations.rx,
            Axis::Y => &self.rotations.ry,
            Axis::Z => &self.rotations.rz,
        }
    }

    fn check_field(&self, field: &SpinorField) -> Result<()> {
        if field.spin_dim() != self.flavor.spin_dim() {
            return Err(WalkError::Mismatch(format!(
                "{:?} walk needs {} spin components, field has {}",
                self.flavor,
                self.flavor.spin_dim(),
                field.spin_dim()
            )));
        }
        if field.geometry() != &self.geometry {
            return Err(WalkError::Mismatch("field lives on a different lattice than the plan".into()));
        }
        Ok(())
    }
}

/// Applies a per-slice 2×2 coin to the listed component pairs of every site.
/// The confining axis is always the last (fastest) axis.
fn apply_coin(
    amps: &mut [Complex64],
    spin_dim: usize,
    slices: usize,
    pairs: &[(usize, usize)],
    coin: impl Fn(usize) -> Coin2x2 + Sync,
) {
    let line = slices * spin_dim;
    amps.par_chunks_mut(line)
        .with_min_len((4096 / line).max(1))
        .for_each(|chunk| {
            for (k, sp) in chunk.chunks_exact_mut(spin_dim).enumerate() {
                let c = coin(k);
                for &(a, b) in pairs {
                    let (u, d) = c.apply(sp[a], sp[b]);
                    sp[a] = u;
                    sp[b] = d;
                }
            }
        });
}

/// Applies one step in place; `scratch` must have the same length as the field.
pub fn step_in_place(field: &mut SpinorField, scratch: &mut Vec<Complex64>, plan: &StepPlan) -> Result<()> {
    plan.check_field(field)?;
    let spin_dim = field.spin_dim();
    let slices = plan.angles.len();
    scratch.resize(field.amplitudes().len(), Complex64::new(0.0, 0.0));
    let geometry = plan.geometry.clone();
    for op in plan.ops() {
        match *op {
            SubOp::CoinQ(sign) => {
                let coins = if sign > 0 { &plan.q_plus } else { &plan.q_minus };
                apply_coin(field.amplitudes_mut(), spin_dim, slices, &[(0, 1)], |k| coins[k]);
            }
            SubOp::Rotation(axis) => {
                let r = *plan.rotation(axis);
                apply_coin(field.amplitudes_mut(), spin_dim, slices, &[(0, 1), (2, 3)], |_| r);
            }
            SubOp::Coupling => {
                apply_coin(field.amplitudes_mut(), spin_dim, slices, &[(0, 2), (1, 3)], |k| plan.coupling[k]);
            }
            SubOp::Shift(axis) => {
                shift_into(
                    field.amplitudes(),
                    scratch,
                    &geometry,
                    spin_dim,
                    axis,
                    displacements(spin_dim, false),
                );
                field.swap_buffer(scratch);
            }
        }
    }
    Ok(())
}

/// Advances the field by one step.
pub fn step(field: &SpinorField, plan: &StepPlan) -> Result<SpinorField> {
    let mut out = field.clone();
    let mut scratch = Vec::new();
    step_in_place(&mut out, &mut scratch, plan)?;
    Ok(out)
}

/// Receives the state after every step (and once before the first).
pub trait Observer {
    fn observe(&mut self, step: u64, field: &SpinorField) -> Result<()>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    /// Record observables every `cadence` steps.
    pub cadence: u64,
    /// Record a warning when the boundary shell holds noticeable probability.
    pub boundary_check: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            cadence: 1,
            boundary_check: true,
        }
    }
}

/// Runs `steps` walk steps. Observables are recorded at every multiple of
/// the cadence and at the final step; `j = 0` is never recorded because
/// `σ/t` is undefined there.
pub fn evolve(
    field: SpinorField,
    plan: &StepPlan,
    steps: u64,
    options: &EvolveOptions,
    observers: &mut [&mut dyn Observer],
) -> Result<(SpinorField, ObservableSeries)> {
    if options.cadence == 0 {
        return Err(crate::error::param("cadence", "must be at least 1"));
    }
    plan.check_field(&field)?;
    let mut field = field;
    let mut scratch = Vec::with_capacity(field.amplitudes().len());
    let mut series = ObservableSeries::default();
    for obs in observers.iter_mut() {
        obs.observe(0, &field)?;
    }
    for j in 1..=steps {
        step_in_place(&mut field, &mut scratch, plan)?;
        if j % options.cadence == 0 || j == steps {
            series.push(ObservableRecord::measure(&field, j)?, options.boundary_check);
        }
        for obs in observers.iter_mut() {
            obs.observe(j, &field)?;
        }
    }
    Ok((field, series))
}

/// Largest dimension `sites × spin_dim` for which a dense matrix is built.
pub const DENSE_LIMIT: usize = 4096;

/// Explicit matrix of one step, indexed like the flat amplitude array.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    pub matrix: DMatrix<Complex64>,
    pub geometry: LatticeGeometry,
    pub spin_dim: usize,
}

impl DenseOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Largest entry of `U†U − 𝕀`.
    pub fn unitarity_defect(&self) -> f64 {
        let prod = self.matrix.adjoint() * &self.matrix;
        max_identity_defect(&prod)
    }

    pub fn apply(&self, field: &SpinorField) -> Result<SpinorField> {
        if field.geometry() != &self.geometry || field.spin_dim() != self.spin_dim {
            return Err(WalkError::Mismatch("field does not match the operator".into()));
        }
        let v = nalgebra::DVector::from_column_slice(field.amplitudes());
        let out = &self.matrix * v;
        SpinorField::from_amplitudes(self.geometry.clone(), self.spin_dim, out.as_slice().to_vec())
    }
}

pub(crate) fn max_identity_defect(m: &DMatrix<Complex64>) -> f64 {
    let mut worst: f64 = 0.0;
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let target = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((m[(r, c)] - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Builds the step matrix column by column from basis states.
pub fn dense_step_matrix(plan: &StepPlan, geometry: &LatticeGeometry) -> Result<DenseOperator> {
    let spin_dim = plan.flavor.spin_dim();
    let dim = geometry.sites() * spin_dim;
    if dim > DENSE_LIMIT {
        return Err(WalkError::TooLarge { dim, limit: DENSE_LIMIT });
    }
    if geometry != plan.geometry() {
        return Err(WalkError::Mismatch("plan was built for a different lattice".into()));
    }
    let columns: Vec<Vec<Complex64>> = (0..dim)
        .into_par_iter()
        .map(|col| {
            let mut basis = SpinorField::zeros(geometry.clone(), spin_dim)?;
            basis.amplitudes_mut()[col] = Complex64::new(1.0, 0.0);
            let mut scratch = Vec::new();
            step_in_place(&mut basis, &mut scratch, plan)?;
            Ok(basis.into_amplitudes())
        })
        .collect::<Result<_>>()?;
    let matrix = DMatrix::from_fn(dim, dim, |r, c| columns[c][r]);
    Ok(DenseOperator {
        matrix,
        geometry: geometry.clone(),
        spin_dim,
    })
}
