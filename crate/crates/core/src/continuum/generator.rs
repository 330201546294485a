//! Numerical first-order generator of a walk step.
//!
//! Integer shifts are embedded in the analytic family `exp(ε d D)`, with `D`
//! the spectral derivative of the grid, and every coin angle is taken at the
//! same `ε`. At `ε` equal to the grid spacing the family reproduces the real
//! step exactly (sizes must be odd for that). The family is differentiated at
//! `ε = 0` with central differences, Richardson-extrapolated in `ε²`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::spectral::{fractional_translation, spectral_derivative};
use crate::coin::{coin_q, x_rotation, Coin2x2};
use crate::engine::{max_identity_defect, DenseOperator, StepPlan, SubOp, DENSE_LIMIT};
use crate::error::{param, Result, WalkError};
use crate::lattice::{Axis, LatticeGeometry};
use crate::shift::displacements;

/// `G` with `U(ε) = 𝕀 + εG + O(ε²)`, indexed like the flat amplitude array.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorEstimate {
    pub matrix: DMatrix<Complex64>,
    /// Size of the last Richardson correction (largest entry).
    pub residual: f64,
    /// Corrections between successive diagonal entries of the Neville table.
    pub residual_history: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub geometry: LatticeGeometry,
    pub spin_dim: usize,
}

/// Spin matrices in `G = Σ_axis B_axis ⊗ ∂_axis + M ⊗ θ̄`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinFactors {
    pub derivative: Vec<(Axis, DMatrix<Complex64>)>,
    /// `None` when θ̄ vanishes everywhere.
    pub mass: Option<DMatrix<Complex64>>,
    /// Largest entry of `G` minus the fitted model.
    pub fit_residual: f64,
}

impl SpinFactors {
    pub fn along(&self, axis: Axis) -> Option<&DMatrix<Complex64>> {
        self.derivative.iter().find(|(a, _)| *a == axis).map(|(_, m)| m)
    }
}

impl GeneratorEstimate {
    /// Largest entry of `(G + G†)/2`.
    pub fn hermitian_part_norm(&self) -> f64 {
        let h = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        h.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Site-level derivative matrix along `axis`, in physical units.
    pub fn derivative_matrix(&self, axis: Axis) -> DMatrix<f64> {
        let g = &self.geometry;
        let d = spectral_derivative(g.size(axis)) / g.epsilon();
        let n = g.sites();
        DMatrix::from_fn(n, n, |r, c| {
            let (cr, cc) = (g.coords(r), g.coords(c));
            let same_elsewhere = (0..g.dims()).all(|a| a == axis.index() || cr[a] == cc[a]);
            if same_elsewhere {
                d[(cr[axis.index()], cc[axis.index()])]
            } else {
                0.0
            }
        })
    }

    /// Least-squares fit of the spin factors. `angles` is θ̄ along the last axis.
    pub fn spin_factors(&self, angles: &[f64]) -> Result<SpinFactors> {
        let g = &self.geometry;
        let sd = self.spin_dim;
        let n = g.sites();
        let last = Axis::from_index(g.dims() - 1).expect("at least one axis");
        if angles.len() != g.size(last) {
            return Err(WalkError::Mismatch(format!(
                "angle table has {} entries, last axis has {} slices",
                angles.len(),
                g.size(last)
            )));
        }
        let block = |r: usize, c: usize| self.matrix.view((r * sd, c * sd), (sd, sd)).into_owned();
        let zero = DMatrix::<Complex64>::zeros(sd, sd);

        let mut model = DMatrix::<Complex64>::zeros(n * sd, n * sd);
        let mut derivative = Vec::new();
        for axis in (0..g.dims()).filter_map(Axis::from_index) {
            let d = self.derivative_matrix(axis);
            let mut acc = zero.clone();
            let mut weight = 0.0;
            for r in 0..n {
                for c in 0..n {
                    if d[(r, c)] != 0.0 {
                        acc += block(r, c) * Complex64::new(d[(r, c)], 0.0);
                        weight += d[(r, c)] * d[(r, c)];
                    }
                }
            }
            let b = acc / Complex64::new(weight, 0.0);
            for r in 0..n {
                for c in 0..n {
                    if d[(r, c)] != 0.0 {
                        let mut v = model.view_mut((r * sd, c * sd), (sd, sd));
                        v += &b * Complex64::new(d[(r, c)], 0.0);
                    }
                }
            }
            derivative.push((axis, b));
        }

        let theta = |site: usize| angles[g.coords(site)[last.index()]];
        let weight: f64 = (0..n).map(|s| theta(s) * theta(s)).sum();
        let mass = if weight > 0.0 {
            let mut acc = zero.clone();
            for s in 0..n {
                acc += block(s, s) * Complex64::new(theta(s), 0.0);
            }
            let m = acc / Complex64::new(weight, 0.0);
            for s in 0..n {
                let mut v = model.view_mut((s * sd, s * sd), (sd, sd));
                v += &m * Complex64::new(theta(s), 0.0);
            }
            Some(m)
        } else {
            None
        };
        let fit_residual = (&self.matrix - model).iter().map(|z| z.norm()).fold(0.0, f64::max);
        Ok(SpinFactors {
            derivative,
            mass,
            fit_residual,
        })
    }
}

fn require_odd(geometry: &LatticeGeometry) -> Result<()> {
    if let Some(n) = geometry.sizes().iter().find(|n| *n % 2 == 0) {
        return Err(WalkError::Geometry(format!(
            "generator extraction needs odd axis sizes for exact fractional shifts, got {n}"
        )));
    }
    Ok(())
}

fn check_dense(plan: &StepPlan) -> Result<usize> {
    let dim = plan.geometry().sites() * plan.flavor().spin_dim();
    if dim > DENSE_LIMIT {
        return Err(WalkError::TooLarge {
            dim,
            limit: DENSE_LIMIT,
        });
    }
    Ok(dim)
}

/// Site-diagonal coin matrix acting on the listed component pairs.
fn coin_matrix(plan: &StepPlan, pairs: &[(usize, usize)], coin: impl Fn(usize) -> Coin2x2) -> DMatrix<Complex64> {
    let g = plan.geometry();
    let sd = plan.flavor().spin_dim();
    let last = g.dims() - 1;
    let mut m = DMatrix::<Complex64>::identity(g.sites() * sd, g.sites() * sd);
    for site in 0..g.sites() {
        let c = coin(g.coords(site)[last]);
        let base = site * sd;
        for &(a, b) in pairs {
            m[(base + a, base + a)] = c.0[(0, 0)];
            m[(base + a, base + b)] = c.0[(0, 1)];
            m[(base + b, base + a)] = c.0[(1, 0)];
            m[(base + b, base + b)] = c.0[(1, 1)];
        }
    }
    m
}

/// Translation by `epsilon · d(s)` along `axis` for every component `s`.
fn translation_matrix(plan: &StepPlan, axis: Axis, epsilon: f64) -> DMatrix<Complex64> {
    let g = plan.geometry();
    let sd = plan.flavor().spin_dim();
    let n = g.size(axis);
    let alpha = epsilon / g.epsilon();
    let disp = displacements(sd, false);
    let plus = fractional_translation(n, alpha);
    let minus = fractional_translation(n, -alpha);
    let a = axis.index();
    let dim = g.sites() * sd;
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for r in 0..g.sites() {
        let cr = g.coords(r);
        let mut cc = cr;
        for l in 0..n {
            cc[a] = l;
            let c = g.site_index(&cc[..g.dims()]);
            for (s, &d) in disp.iter().enumerate() {
                let e = if d > 0 { &plus } else { &minus };
                m[(r * sd + s, c * sd + s)] = e[(cr[a], l)];
            }
        }
    }
    m
}

/// Dense `U(ε)` of the analytic family through the step of `plan`.
pub fn family_step_matrix(plan: &StepPlan, epsilon: f64) -> Result<DenseOperator> {
    let dim = check_dense(plan)?;
    require_odd(plan.geometry())?;
    let angles = plan.angles();
    let rot = plan.rotations();
    let mut u = DMatrix::<Complex64>::identity(dim, dim);
    for op in plan.ops() {
        let factor = match *op {
            SubOp::CoinQ(sign) => coin_matrix(plan, &[(0, 1)], |k| coin_q(sign, angles[k], epsilon)),
            SubOp::Rotation(axis) => {
                let r = match axis {
                    Axis::X => rot.rx,
                    Axis::Y => rot.ry,
                    Axis::Z => rot.rz,
                };
                coin_matrix(plan, &[(0, 1), (2, 3)], |_| r)
            }
            SubOp::Coupling => coin_matrix(plan, &[(0, 2), (1, 3)], |k| x_rotation(angles[k] * epsilon)),
            SubOp::Shift(axis) => translation_matrix(plan, axis, epsilon),
        };
        u = factor * u;
    }
    Ok(DenseOperator {
        matrix: u,
        geometry: plan.geometry().clone(),
        spin_dim: plan.flavor().spin_dim(),
    })
}

/// Default ladder: the grid spacing times `2^-3 … 2^-8`.
pub fn default_epsilons(spacing: f64) -> Vec<f64> {
    (3..=8).map(|k| spacing / f64::from(1 << k)).collect()
}

fn max_entry(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Fits `U(ε) = 𝕀 + εG + O(ε²)` over `epsilons` (physical units).
pub fn extract_generator(plan: &StepPlan, geometry: &LatticeGeometry, epsilons: &[f64]) -> Result<GeneratorEstimate> {
    if plan.geometry() != geometry {
        return Err(WalkError::Mismatch("plan was built for a different lattice".into()));
    }
    check_dense(plan)?;
    require_odd(geometry)?;
    if epsilons.len() < 3 {
        return Err(param("epsilons", "need at least three values"));
    }
    if epsilons.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(param("epsilons", "must be positive"));
    }
    let mut eps = epsilons.to_vec();
    eps.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    eps.dedup();
    if eps.len() < 3 {
        return Err(param("epsilons", "need at least three distinct values"));
    }

    let u0 = family_step_matrix(plan, 0.0)?;
    let defect = max_identity_defect(&u0.matrix);
    if defect > 1e-12 {
        return Err(WalkError::Domain(format!(
            "the step does not reduce to the identity at zero lattice spacing (defect {defect:.3e})"
        )));
    }

    let central: Vec<DMatrix<Complex64>> = eps
        .iter()
        .map(|&e| {
            let up = family_step_matrix(plan, e)?.matrix;
            let down = family_step_matrix(plan, -e)?.matrix;
            Ok((up - down) / Complex64::new(2.0 * e, 0.0))
        })
        .collect::<Result<_>>()?;

    // Neville table in h = ε²; row i holds T_{i,0..=i}.
    let h: Vec<f64> = eps.iter().map(|e| e * e).collect();
    let mut prev: Vec<DMatrix<Complex64>> = Vec::new();
    let mut diagonal = Vec::new();
    for (i, c) in central.into_iter().enumerate() {
        let mut row = vec![c];
        for k in 1..=i {
            let (hi, hk) = (h[i], h[i - k]);
            let t = (&row[k - 1] * Complex64::new(hk, 0.0) - &prev[k - 1] * Complex64::new(hi, 0.0))
                / Complex64::new(hk - hi, 0.0);
            row.push(t);
        }
        diagonal.push(row[i].clone());
        prev = row;
    }
    let residual_history: Vec<f64> = diagonal.windows(2).map(|w| max_entry(&(&w[1] - &w[0]))).collect();
    let matrix = diagonal.pop().expect("at least three rows");
    let residual = *residual_history.last().expect("at least two corrections");
    let scale = max_entry(&matrix).max(1.0);
    let never_improves = residual_history.windows(2).all(|w| w[1] >= w[0]);
    if never_improves && residual > 1e-12 * scale {
        return Err(WalkError::ExtractionFailed {
            residuals: residual_history,
        });
    }
    Ok(GeneratorEstimate {
        matrix,
        residual,
        residual_history,
        epsilons: eps,
        geometry: geometry.clone(),
        spin_dim: plan.flavor().spin_dim(),
    })
}
