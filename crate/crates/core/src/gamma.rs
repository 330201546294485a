//! Fixed Pauli and Dirac matrices used by the continuum checks.
//!
//! Four-component matrices act on `(ψ¹↑, ψ¹↓, ψ²↑, ψ²↓)`; `a ⊗ b` means `a`
//! acts on the ψ¹/ψ² block label and `b` on the spin inside a block.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

use crate::coin::kron2;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity2() -> Matrix2<Complex64> {
    Matrix2::identity()
}

pub fn sigma_x() -> Matrix2<Complex64> {
    Matrix2::new(c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.))
}

pub fn sigma_y() -> Matrix2<Complex64> {
    Matrix2::new(c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.))
}

pub fn sigma_z() -> Matrix2<Complex64> {
    Matrix2::new(c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.))
}

/// Two-component gammas: `γ⁰ = −σ_x`, `γ¹ = −iσ_y`, `γᶜ = iγ⁰γ¹ = −iσ_z`.
pub fn gamma_2d() -> [Matrix2<Complex64>; 3] {
    let i = c(0., 1.);
    [-sigma_x(), -sigma_y() * i, -sigma_z() * i]
}

/// Weyl-representation `γ⁰, γ¹, γ², γ³`.
pub fn weyl_gammas() -> [Matrix4<Complex64>; 4] {
    let block = |a: Matrix2<Complex64>, b: Matrix2<Complex64>| {
        let mut m = Matrix4::zeros();
        m.fixed_view_mut::<2, 2>(0, 2).copy_from(&a);
        m.fixed_view_mut::<2, 2>(2, 0).copy_from(&b);
        m
    };
    [
        block(identity2(), identity2()),
        block(sigma_x(), -sigma_x()),
        block(sigma_y(), -sigma_y()),
        block(sigma_z(), -sigma_z()),
    ]
}

/// Weyl `γ⁵ = diag(−𝕀, 𝕀)`.
pub fn weyl_gamma5() -> Matrix4<Complex64> {
    Matrix4::from_diagonal(&nalgebra::Vector4::new(c(-1., 0.), c(-1., 0.), c(1., 0.), c(1., 0.)))
}

/// `B₀ = σ_x ⊗ 𝕀₂`.
pub fn b0() -> Matrix4<Complex64> {
    kron2(&sigma_x(), &identity2())
}

/// `Z = 𝕀₂ ⊗ σ_z` as written for the block shifts, without the sign flip of
/// the adjoint block.
pub fn z_unflipped() -> Matrix4<Complex64> {
    kron2(&identity2(), &sigma_z())
}

/// First-order part of `diag(S, S†)`: `σ_z ⊗ σ_z`.
pub fn z_block_shift() -> Matrix4<Complex64> {
    kron2(&sigma_z(), &sigma_z())
}

/// Minkowski metric diagonal `(1, −1, −1, −1)`.
pub const METRIC: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

/// Largest entry modulus of `m`.
pub fn max_entry<R: nalgebra::Dim, C: nalgebra::Dim, S>(m: &nalgebra::Matrix<Complex64, R, C, S>) -> f64
where
    S: nalgebra::RawStorage<Complex64, R, C>,
{
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
