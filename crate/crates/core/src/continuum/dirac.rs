//! Spectral reference solver for the two-dimensional Dirac equation with a
//! position-dependent mass.
//!
//! The equation is `∂_t ψ = (α_x ∂_x + α_y ∂_y + θ̄(y) β) ψ` on the periodic
//! grid of a [`LatticeGeometry`]. Spatial derivatives are taken in Fourier
//! space; time stepping is classical fourth-order Runge–Kutta.

use std::sync::Arc;

use nalgebra::Matrix2;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::spectral::wavenumbers;
use crate::coin::{angle_table, x_rotation, AngleMode, DomainWallParams};
use crate::error::{param, Result, WalkError};
use crate::gamma::{sigma_x, sigma_y, sigma_z};
use crate::lattice::{stable_sum, Axis, LatticeGeometry, SpinorField};

/// Largest accepted `dt · λ_max`. Fourth-order Runge–Kutta is stable on the
/// imaginary axis up to `2√2`.
pub const STABILITY_LIMIT: f64 = 2.5;

/// Relative norm drift at which a run is abandoned.
pub const DRIFT_ABORT: f64 = 1e-4;

/// Spin basis in which the equation is written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiracFrame {
    /// `σ_y ∂_x + σ_z ∂_y − 2iθ̄ σ_x`, the first-order generator of the 2D walk.
    #[default]
    Walk,
    /// `σ_z ∂_x − σ_y ∂_y − iθ̄ σ_x`.
    Textbook,
}

/// `V = exp(iπ/4 σ_x)`. Conjugating the textbook kinetic term by `V` gives
/// the walk's kinetic term: `V σ_z V† = σ_y`, `V σ_y V† = −σ_z`, and `σ_x`
/// is left alone.
pub fn frame_rotation() -> Matrix2<Complex64> {
    x_rotation(std::f64::consts::FRAC_PI_4).0
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiracOperator2d {
    geometry: LatticeGeometry,
    alpha_x: Matrix2<Complex64>,
    alpha_y: Matrix2<Complex64>,
    beta: Matrix2<Complex64>,
    angles: Vec<f64>,
}

impl DiracOperator2d {
    /// Operator in `frame` with the wall of `params` evaluated at physical
    /// coordinates of `geometry`; `params.epsilon` plays no role here.
    pub fn new(frame: DiracFrame, geometry: &LatticeGeometry, params: &DomainWallParams) -> Result<Self> {
        params.validate()?;
        check_2d(geometry)?;
        let angles = angle_table(params, geometry, Axis::Y, AngleMode::Physical);
        Self::with_angles(frame, geometry, angles)
    }

    pub fn with_angles(frame: DiracFrame, geometry: &LatticeGeometry, angles: Vec<f64>) -> Result<Self> {
        check_2d(geometry)?;
        let i = Complex64::new(0.0, 1.0);
        let (alpha_x, alpha_y, beta) = match frame {
            DiracFrame::Walk => (sigma_y(), sigma_z(), sigma_x() * (-2.0 * i)),
            DiracFrame::Textbook => (sigma_z(), -sigma_y(), sigma_x() * (-i)),
        };
        Self::from_parts(geometry, alpha_x, alpha_y, beta, angles)
    }

    pub fn from_parts(
        geometry: &LatticeGeometry,
        alpha_x: Matrix2<Complex64>,
        alpha_y: Matrix2<Complex64>,
        beta: Matrix2<Complex64>,
        angles: Vec<f64>,
    ) -> Result<Self> {
        check_2d(geometry)?;
        if angles.len() != geometry.size(Axis::Y) {
            return Err(WalkError::Mismatch(format!(
                "angle table has {} entries, y axis has {} slices",
                angles.len(),
                geometry.size(Axis::Y)
            )));
        }
        Ok(Self {
            geometry: geometry.clone(),
            alpha_x,
            alpha_y,
            beta,
            angles,
        })
    }

    pub fn geometry(&self) -> &LatticeGeometry {
        &self.geometry
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// Upper bound on the modulus of the operator's eigenvalues.
    pub fn max_rate(&self) -> f64 {
        let kmax = |axis| {
            wavenumbers(self.geometry.size(axis), self.geometry.epsilon())
                .into_iter()
                .fold(0.0, |a: f64, k| a.max(k.abs()))
        };
        let spectral_norm = |m: &Matrix2<Complex64>| m.singular_values().max();
        let theta_max = self.angles.iter().fold(0.0, |a: f64, t| a.max(t.abs()));
        spectral_norm(&self.alpha_x) * kmax(Axis::X)
            + spectral_norm(&self.alpha_y) * kmax(Axis::Y)
            + spectral_norm(&self.beta) * theta_max
    }

    /// Integrates from `initial` to `t_final`. The step is `t_final / ⌈t_final/dt⌉`,
    /// never larger than `dt`.
    pub fn evolve(&self, initial: &SpinorField, t_final: f64, dt: f64) -> Result<DiracRun> {
        if initial.spin_dim() != 2 || initial.geometry() != &self.geometry {
            return Err(WalkError::Mismatch(
                "reference solver needs a two-component field on the operator's grid".into(),
            ));
        }
        if !(t_final >= 0.0 && t_final.is_finite()) {
            return Err(param("t_final", "must be finite and non-negative"));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(param("dt", "must be positive"));
        }
        let steps = ((t_final / dt) - 1e-9).ceil().max(0.0) as usize;
        if steps == 0 {
            return Ok(DiracRun {
                field: initial.clone(),
                steps: 0,
                dt: 0.0,
                norm_drift: 0.0,
            });
        }
        let h = t_final / steps as f64;
        let rate = self.max_rate();
        if h * rate > STABILITY_LIMIT {
            return Err(param(
                "dt",
                format!("dt·λ_max = {:.3} exceeds {STABILITY_LIMIT}; use dt ≤ {:.3e}", h * rate, STABILITY_LIMIT / rate),
            ));
        }

        let mut solver = Solver::new(self);
        let mut state = deinterleave(initial.amplitudes());
        let norm0 = norm(&state);
        let mut drift: f64 = 0.0;
        for s in 1..=steps {
            solver.rk4(&mut state, h);
            if norm0 > 0.0 {
                let d = (norm(&state) / norm0 - 1.0).abs();
                drift = drift.max(d);
                if d > DRIFT_ABORT || !d.is_finite() {
                    return Err(WalkError::Unstable {
                        drift: d,
                        time: s as f64 * h,
                    });
                }
            }
        }
        let field = SpinorField::from_amplitudes(self.geometry.clone(), 2, interleave(&state))?;
        Ok(DiracRun {
            field,
            steps,
            dt: h,
            norm_drift: drift,
        })
    }
}

fn check_2d(geometry: &LatticeGeometry) -> Result<()> {
    if geometry.dims() != 2 {
        return Err(WalkError::Mismatch(format!(
            "the reference solver is two-dimensional, lattice has {} axes",
            geometry.dims()
        )));
    }
    Ok(())
}

/// Result of a reference run.
#[derive(Debug, Clone, PartialEq)]
pub struct DiracRun {
    pub field: SpinorField,
    pub steps: usize,
    /// Step actually used.
    pub dt: f64,
    /// Largest `|N(t)/N(0) − 1|` seen during the run.
    pub norm_drift: f64,
}

/// Walk-frame reference evolution (see [`DiracFrame::Walk`]).
pub fn dirac_evolve_2d(
    initial: &SpinorField,
    params: &DomainWallParams,
    t_final: f64,
    dt: f64,
) -> Result<SpinorField> {
    let op = DiracOperator2d::new(DiracFrame::Walk, initial.geometry(), params)?;
    op.evolve(initial, t_final, dt).map(|run| run.field)
}

/// Two components stored one after the other, each row-major `nx × ny`.
type State = Vec<Complex64>;

fn deinterleave(amps: &[Complex64]) -> State {
    let n = amps.len() / 2;
    let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
    for (k, sp) in amps.chunks_exact(2).enumerate() {
        out[k] = sp[0];
        out[n + k] = sp[1];
    }
    out
}

fn interleave(state: &[Complex64]) -> Vec<Complex64> {
    let n = state.len() / 2;
    (0..n).flat_map(|k| [state[k], state[n + k]]).collect()
}

fn norm(state: &[Complex64]) -> f64 {
    stable_sum(state, |a| a.norm_sqr())
}

struct Solver<'a> {
    op: &'a DiracOperator2d,
    nx: usize,
    ny: usize,
    kx: Vec<f64>,
    ky: Vec<f64>,
    fwd_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
    column: Vec<Complex64>,
    spec: State,
}

impl<'a> Solver<'a> {
    fn new(op: &'a DiracOperator2d) -> Self {
        let g = &op.geometry;
        let (nx, ny) = (g.size(Axis::X), g.size(Axis::Y));
        let mut planner = FftPlanner::new();
        Self {
            op,
            nx,
            ny,
            kx: wavenumbers(nx, g.epsilon()),
            ky: wavenumbers(ny, g.epsilon()),
            fwd_x: planner.plan_fft_forward(nx),
            fwd_y: planner.plan_fft_forward(ny),
            inv_x: planner.plan_fft_inverse(nx),
            inv_y: planner.plan_fft_inverse(ny),
            column: vec![Complex64::new(0.0, 0.0); nx],
            spec: vec![Complex64::new(0.0, 0.0); 2 * nx * ny],
        }
    }

    fn transform(&mut self, data: &mut [Complex64], inverse: bool) {
        let (fx, fy) = if inverse {
            (&self.inv_x, &self.inv_y)
        } else {
            (&self.fwd_x, &self.fwd_y)
        };
        fy.process(data);
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                self.column[ix] = data[ix * self.ny + iy];
            }
            fx.process(&mut self.column);
            for ix in 0..self.nx {
                data[ix * self.ny + iy] = self.column[ix];
            }
        }
    }

    /// `out = A ψ`.
    fn rhs(&mut self, psi: &[Complex64], out: &mut [Complex64]) {
        let n = self.nx * self.ny;
        let mut spec = std::mem::take(&mut self.spec);
        spec.copy_from_slice(psi);
        {
            let (u, d) = spec.split_at_mut(n);
            self.transform(u, false);
            self.transform(d, false);
        }
        let i = Complex64::new(0.0, 1.0);
        let (ax, ay) = (self.op.alpha_x, self.op.alpha_y);
        let scale = 1.0 / n as f64;
        for ix in 0..self.nx {
            for iy in 0..self.ny {
                let k = ix * self.ny + iy;
                let m = (ax * Complex64::new(self.kx[ix], 0.0) + ay * Complex64::new(self.ky[iy], 0.0)) * (i * scale);
                let (u, d) = (spec[k], spec[n + k]);
                out[k] = m[(0, 0)] * u + m[(0, 1)] * d;
                out[n + k] = m[(1, 0)] * u + m[(1, 1)] * d;
            }
        }
        {
            let (u, d) = out.split_at_mut(n);
            self.transform(u, true);
            self.transform(d, true);
        }
        let b = self.op.beta;
        for ix in 0..self.nx {
            for iy in 0..self.ny {
                let k = ix * self.ny + iy;
                let t = self.op.angles[iy];
                let (u, d) = (psi[k], psi[n + k]);
                out[k] += (b[(0, 0)] * u + b[(0, 1)] * d) * t;
                out[n + k] += (b[(1, 0)] * u + b[(1, 1)] * d) * t;
            }
        }
        self.spec = spec;
    }

    fn rk4(&mut self, psi: &mut State, h: f64) {
        let len = psi.len();
        let zero = Complex64::new(0.0, 0.0);
        let mut k = vec![zero; len];
        let mut tmp = vec![zero; len];
        let mut acc = psi.clone();
        for (stage, (w, c)) in [(1.0, 0.5), (2.0, 0.5), (2.0, 1.0), (1.0, 0.0)].into_iter().enumerate() {
            let input = if stage == 0 { &psi[..] } else { &tmp[..] };
            self.rhs(input, &mut k);
            for j in 0..len {
                acc[j] += k[j] * (h * w / 6.0);
            }
            if stage < 3 {
                for j in 0..len {
                    tmp[j] = psi[j] + k[j] * (h * c);
                }
            }
        }
        *psi = acc;
    }
}
