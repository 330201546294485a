//! Coin unitaries and the domain-wall angle profile that makes them
//! position dependent.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::lattice::{Axis, LatticeGeometry};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Parameters of the tanh kink `θ̄(y) = h (m/√λ) tanh(m y/√2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainWallParams {
    /// Effective mass `m`; sets both the height and the inverse width of the wall.
    pub mass: f64,
    /// Self-coupling `λ` of the underlying scalar field.
    pub lambda: f64,
    /// Yukawa-like coupling `h` between walker and wall.
    pub coupling: f64,
    /// Lattice parameter `ε`.
    pub epsilon: f64,
}

impl DomainWallParams {
    pub fn new(mass: f64, lambda: f64, coupling: f64, epsilon: f64) -> Result<Self> {
        let p = Self {
            mass,
            lambda,
            coupling,
            epsilon,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(param("lambda", "lambda must be positive"));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(param("epsilon", "epsilon must be positive"));
        }
        if !(self.mass >= 0.0 && self.mass.is_finite()) {
            return Err(param("mass", "mass must be non-negative"));
        }
        if !self.coupling.is_finite() {
            return Err(param("coupling", "coupling must be finite"));
        }
        Ok(())
    }

    /// `|h| m / √λ`, the asymptotic height of the profile.
    pub fn asymptote(&self) -> f64 {
        self.coupling.abs() * self.mass / self.lambda.sqrt()
    }
}

/// What goes into the tanh: the physical coordinate `(q - origin) ε` or the
/// bare offset `q - origin`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AngleMode {
    #[default]
    Physical,
    Index,
}

impl AngleMode {
    pub fn name(self) -> &'static str {
        match self {
            AngleMode::Physical => "physical",
            AngleMode::Index => "index",
        }
    }
}

/// `θ̄(y) = h (m/√λ) tanh(m y / √2)`.
pub fn domain_wall_angle(params: &DomainWallParams, y: f64) -> f64 {
    params.coupling * params.mass / params.lambda.sqrt()
        * (params.mass * y / std::f64::consts::SQRT_2).tanh()
}

/// θ̄ for every slice along `axis`, evaluated once per run.
pub fn angle_table(
    params: &DomainWallParams,
    geometry: &LatticeGeometry,
    axis: Axis,
    mode: AngleMode,
) -> Vec<f64> {
    (0..geometry.size(axis))
        .map(|k| {
            let y = match mode {
                AngleMode::Physical => geometry.coordinate(axis, k),
                AngleMode::Index => k as f64 - geometry.origin()[axis.index()] as f64,
            };
            domain_wall_angle(params, y)
        })
        .collect()
}

fn max_abs_diff<const N: usize>(
    a: &nalgebra::SMatrix<Complex64, N, N>,
    b: &nalgebra::SMatrix<Complex64, N, N>,
) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// A 2×2 complex matrix acting on one spin pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coin2x2(pub Matrix2<Complex64>);

impl Coin2x2 {
    pub fn identity() -> Self {
        Coin2x2(Matrix2::identity())
    }

    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Coin2x2(Matrix2::new(a, b, c, d))
    }

    pub fn matrix(&self) -> &Matrix2<Complex64> {
        &self.0
    }

    pub fn adjoint(&self) -> Self {
        Coin2x2(self.0.adjoint())
    }

    /// Largest entry of `U†U − 𝕀`.
    pub fn unitarity_defect(&self) -> f64 {
        max_abs_diff(&(self.0.adjoint() * self.0), &Matrix2::identity())
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    pub fn max_abs_diff(&self, other: &Coin2x2) -> f64 {
        max_abs_diff(&self.0, &other.0)
    }

    #[inline]
    pub fn apply(&self, up: Complex64, down: Complex64) -> (Complex64, Complex64) {
        let m = &self.0;
        (m[(0, 0)] * up + m[(0, 1)] * down, m[(1, 0)] * up + m[(1, 1)] * down)
    }
}

impl std::ops::Mul for Coin2x2 {
    type Output = Coin2x2;
    fn mul(self, rhs: Coin2x2) -> Coin2x2 {
        Coin2x2(self.0 * rhs.0)
    }
}

/// A 4×4 complex matrix on `(ψ¹↑, ψ¹↓, ψ²↑, ψ²↓)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coin4x4(pub Matrix4<Complex64>);

impl Coin4x4 {
    pub fn identity() -> Self {
        Coin4x4(Matrix4::identity())
    }

    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.0
    }

    /// `diag(r, r)`: the same 2×2 rotation on the ψ¹ and the ψ² pair.
    pub fn block_diagonal(r: &Coin2x2) -> Self {
        Coin4x4(kron2(&Matrix2::identity(), &r.0))
    }

    /// `a ⊗ 𝕀₂`: the 2×2 factor mixes ψ¹ with ψ².
    pub fn block_mixing(a: &Coin2x2) -> Self {
        Coin4x4(kron2(&a.0, &Matrix2::identity()))
    }

    pub fn unitarity_defect(&self) -> f64 {
        max_abs_diff(&(self.0.adjoint() * self.0), &Matrix4::identity())
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    pub fn max_abs_diff(&self, other: &Coin4x4) -> f64 {
        max_abs_diff(&self.0, &other.0)
    }
}

/// Kronecker product of two 2×2 matrices; the left factor is the slow index.
pub fn kron2(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>) -> Matrix4<Complex64> {
    Matrix4::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

/// `[[cos θ, i sin θ], [i sin θ, cos θ]]`, i.e. `exp(iθσ_x)`.
pub fn x_rotation(theta: f64) -> Coin2x2 {
    let (s, c) = theta.sin_cos();
    let cc = Complex64::new(c, 0.0);
    let is = Complex64::new(0.0, s);
    Coin2x2::new(cc, is, is, cc)
}

/// The 2D coin `Q±` with angle `θ± = ±π/4 − ε θ̄`.
pub fn coin_q(sign: i32, theta_bar: f64, epsilon: f64) -> Coin2x2 {
    let base = if sign >= 0 { FRAC_PI_4 } else { -FRAC_PI_4 };
    x_rotation(base - epsilon * theta_bar)
}

/// The 3D coupling coin `Θ = exp(i θ̄ε σ_x) ⊗ 𝕀₂`.
pub fn coin_theta_r(theta_bar: f64, epsilon: f64) -> Coin4x4 {
    Coin4x4::block_mixing(&x_rotation(theta_bar * epsilon))
}

/// The rotations entering the 3D step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationSet {
    pub rx: Coin2x2,
    pub ry: Coin2x2,
    pub rz: Coin2x2,
}

impl RotationSet {
    /// `R_z R_x R_y`, which must be the identity for a continuum limit to exist.
    pub fn zeroth_order_product(&self) -> Coin2x2 {
        self.rz * self.rx * self.ry
    }
}

/// `R_x` is the Hadamard matrix, `R_z = (σ_z + σ_y)/√2` and `R_y = R_x R_z`.
pub fn rotation_set() -> RotationSet {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let rx = Coin2x2::new(h, h, h, -h);
    let rz = Coin2x2::new(h, -I * h, I * h, -h);
    RotationSet {
        rx,
        ry: rx * rz,
        rz,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    const ZERO: Complex64 = Complex64::new(0.0, 0.0);

    fn c64(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn fig1(mass: f64) -> DomainWallParams {
        DomainWallParams::new(mass, 60.0, 70.0, 0.04).unwrap()
    }

    #[test]
    fn angle_vanishes_at_wall_and_saturates() {
        let p = fig1(2.0);
        assert_eq!(domain_wall_angle(&p, 0.0), 0.0);
        let asym = 70.0 * 2.0 / 60f64.sqrt();
        assert!((domain_wall_angle(&p, 1e3) - asym).abs() < 1e-12);
        assert!((domain_wall_angle(&p, -1e3) + asym).abs() < 1e-12);
        assert!((p.asymptote() - asym).abs() < 1e-15);
    }

    #[test]
    fn angle_is_odd() {
        let p = fig1(3.7);
        for i in 0..101 {
            let y = -5.0 + 0.1 * i as f64;
            assert!((domain_wall_angle(&p, -y) + domain_wall_angle(&p, y)).abs() < 1e-15);
        }
    }

    #[test]
    fn angle_is_monotone_and_bounded() {
        let p = fig1(1.3);
        let mut prev = f64::NEG_INFINITY;
        for i in 0..2001 {
            let y = -10.0 + 0.01 * i as f64;
            let v = domain_wall_angle(&p, y);
            assert!(v >= prev);
            assert!(v.abs() <= p.asymptote());
            prev = v;
        }
    }

    #[test]
    fn zero_mass_gives_flat_profile() {
        let g = LatticeGeometry::new(&[8, 16], 0.04).unwrap();
        for mode in [AngleMode::Physical, AngleMode::Index] {
            let table = angle_table(&fig1(0.0), &g, Axis::Y, mode);
            assert!(table.iter().all(|&t| t == 0.0));
        }
        assert_eq!(coin_theta_r(0.0, 0.04), Coin4x4::identity());
    }

    #[test]
    fn params_validation() {
        assert!(DomainWallParams::new(1.0, 0.0, 70.0, 0.04).is_err());
        assert!(DomainWallParams::new(-1.0, 60.0, 70.0, 0.04).is_err());
        assert!(DomainWallParams::new(1.0, 60.0, 70.0, 0.0).is_err());
        assert!(DomainWallParams::new(1.0, 60.0, -3.0, 0.04).is_ok());
    }

    #[test]
    fn q_plus_at_zero_angle() {
        let q = coin_q(1, 0.0, 0.04);
        let h = FRAC_1_SQRT_2;
        let expected = Coin2x2::new(c64(h), I * h, I * h, c64(h));
        assert!(q.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn q_plus_times_q_minus_is_identity_without_wall() {
        for eps in [0.01, 0.04, 0.3] {
            let prod = coin_q(1, 0.0, eps) * coin_q(-1, 0.0, eps);
            assert!(prod.max_abs_diff(&Coin2x2::identity()) < 1e-15);
        }
    }

    #[test]
    fn coins_are_unitary_for_random_draws() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..1000 {
            let sign = if rng.random::<bool>() { 1 } else { -1 };
            let tb = rng.random_range(-200.0..200.0);
            let eps = rng.random_range(1e-4..0.5);
            assert!(coin_q(sign, tb, eps).is_unitary(1e-15));
            assert!(coin_theta_r(tb, eps).is_unitary(1e-15));
        }
    }

    #[test]
    fn theta_r_at_quarter_turn_swaps_blocks() {
        let theta = coin_theta_r(std::f64::consts::FRAC_PI_2, 1.0);
        // cos = 0, sin = 1: ψ¹ ← i ψ², ψ² ← i ψ¹
        let m = theta.matrix();
        for r in 0..4 {
            for c in 0..4 {
                let expected = if (r + 2) % 4 == c { I } else { ZERO };
                assert!((m[(r, c)] - expected).norm() < 1e-15, "({r},{c})");
            }
        }
    }

    #[test]
    fn rotations_satisfy_zeroth_order_condition() {
        let r = rotation_set();
        assert!((r.rx * r.rx).max_abs_diff(&Coin2x2::identity()) < 1e-15);
        assert!((r.rz * r.rz).max_abs_diff(&Coin2x2::identity()) < 1e-15);
        assert!(r.zeroth_order_product().max_abs_diff(&Coin2x2::identity()) < 1e-15);
        assert_eq!(r.ry, r.rx * r.rz);
        for c in [r.rx, r.ry, r.rz] {
            assert!(c.is_unitary(1e-15));
        }
    }

    #[test]
    fn block_embeddings() {
        let r = rotation_set().rz;
        let d = Coin4x4::block_diagonal(&r);
        for (row, col) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            assert_eq!(d.0[(row, col)], r.0[(row, col)]);
            assert_eq!(d.0[(row + 2, col + 2)], r.0[(row, col)]);
            assert_eq!(d.0[(row, col + 2)], ZERO);
        }
        let m = Coin4x4::block_mixing(&r);
        assert_eq!(m.0[(0, 2)], r.0[(0, 1)]);
        assert_eq!(m.0[(1, 3)], r.0[(0, 1)]);
        assert_eq!(m.0[(0, 1)], ZERO);
    }
}
