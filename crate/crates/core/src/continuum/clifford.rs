//! Clifford-algebra check of the measured 3D spin factors.
//!
//! The generator of the 3D step is `Σ_i B_i ∂_i + iθ̄ B_0`. For a Dirac
//! operator the four Hermitian matrices must square to the identity and
//! anticommute pairwise; then some unitary `W` maps them onto the Weyl
//! `{γ⁰γ¹, γ⁰γ², γ⁰γ³, γ⁰}`.

use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::generator::{default_epsilons, extract_generator};
use crate::coin::{coin_theta_r, Coin2x2, Coin4x4, RotationSet};
use crate::engine::{Flavor, StepPlan};
use crate::error::{Result, WalkError};
use crate::gamma::{b0, max_entry, weyl_gammas, z_block_shift, z_unflipped};
use crate::lattice::{Axis, LatticeGeometry};

pub const CLIFFORD_TOLERANCE: f64 = 1e-10;

/// Edge length of the lattice the spin factors are measured on.
pub const CHECK_SIZE: usize = 3;

/// Constant θ̄ used while measuring; the fitted factors do not depend on it.
const CHECK_THETA: f64 = 1.0;

type M4 = Matrix4<Complex64>;

/// Row-major matrix of `[re, im]` pairs.
pub type MatrixRows = Vec<Vec<[f64; 2]>>;

pub fn matrix_rows(m: &M4) -> MatrixRows {
    (0..4).map(|r| (0..4).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationCheck {
    pub relation: String,
    pub residual: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasuredFactors {
    pub b_x: MatrixRows,
    pub b_y: MatrixRows,
    pub b_z: MatrixRows,
    pub b_0: MatrixRows,
    /// Largest entry of the generator minus the fitted model.
    pub fit_residual: f64,
    pub generator_residual: f64,
    pub epsilons: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylSimilarity {
    /// `max_k |W B_k W† − T_k|` for the best intertwiner found.
    pub residual: f64,
    pub found: bool,
}

/// Spin factors predicted from the rotations when the block shift's
/// first-order term is taken as `𝕀 ⊗ σ_z` instead of `σ_z ⊗ σ_z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnflippedShiftCheck {
    /// Largest `|{B_i, B_0}|` over the three predicted matrices.
    pub max_anticommutator_with_b0: f64,
    /// Largest `|[B_i, B_0]|`; zero means all of them commute with `B_0`.
    pub max_commutator_with_b0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CliffordReport {
    pub tolerance: f64,
    pub lattice: Vec<usize>,
    /// Largest entry of `R_z R_x R_y − 𝕀`.
    pub zeroth_order_defect: f64,
    pub zeroth_order_passed: bool,
    /// `(Θ − Θ†)/(2i sin θ̄ε)` equals `σ_x ⊗ 𝕀₂` bit for bit.
    pub b0_from_coupling_exact: bool,
    pub measured: Option<MeasuredFactors>,
    /// Largest deviation of the measured factors from the rotation-conjugated
    /// `σ_z ⊗ σ_z` prediction.
    pub prediction_residual: Option<f64>,
    pub relations: Vec<RelationCheck>,
    pub weyl_similarity: Option<WeylSimilarity>,
    pub unflipped_shift: UnflippedShiftCheck,
    pub failures: Vec<String>,
    pub passed: bool,
}

fn to_m4(m: &DMatrix<Complex64>) -> M4 {
    M4::from_fn(|r, c| m[(r, c)])
}

fn identity_defect(m: &M4) -> f64 {
    max_entry(&(m - M4::identity()))
}

/// `B_0` read off the coupling coin alone.
pub fn b0_from_coupling() -> M4 {
    let angle = 0.5;
    let theta = coin_theta_r(CHECK_THETA, angle).0;
    let diff = theta - theta.adjoint();
    diff * Complex64::new(0.0, -1.0) / Complex64::new(2.0 * (CHECK_THETA * angle).sin(), 0.0)
}

/// `B_z = Z`, `B_x = ℛ_z Z ℛ_z†`, `B_y = (ℛ_z ℛ_x) Z (ℛ_z ℛ_x)†`.
pub fn predicted_factors(rotations: &RotationSet, z: &M4) -> [M4; 3] {
    let lift = |r: &Coin2x2| Coin4x4::block_diagonal(r).0;
    let rz = lift(&rotations.rz);
    let rzx = lift(&(rotations.rz * rotations.rx));
    [rz * z * rz.adjoint(), rzx * z * rzx.adjoint(), *z]
}

/// The products `S_a^i S_b^j S_c^k S_d^l` for `i, j, k, l ∈ {0, 1}`.
fn products(set: &[M4; 4]) -> Vec<M4> {
    (0..16)
        .map(|mask| {
            (0..4)
                .filter(|b| mask & (1 << b) != 0)
                .fold(M4::identity(), |acc, b| acc * set[b])
        })
        .collect()
}

/// Unitary `W` with `W S_k W† ≈ T_k`, built by averaging over the group the
/// generators span. Returns the residual of the best candidate.
pub fn weyl_similarity(source: &[M4; 4], target: &[M4; 4]) -> WeylSimilarity {
    let ps = products(source);
    let pt = products(target);
    let mut best = f64::MAX;
    for seed in 0..16 {
        let mut x = M4::zeros();
        x[(seed / 4, seed % 4)] = Complex64::new(1.0, 0.0);
        let w: M4 = ps.iter().zip(&pt).map(|(s, t)| t * x * s.adjoint()).sum();
        let scale = (w.adjoint() * w)[(0, 0)].re;
        if scale < 1e-6 {
            continue;
        }
        let w = w / Complex64::new(scale.sqrt(), 0.0);
        let residual = source
            .iter()
            .zip(target)
            .map(|(s, t)| max_entry(&(w * s * w.adjoint() - t)))
            .fold(max_entry(&(w.adjoint() * w - M4::identity())), f64::max);
        best = best.min(residual);
    }
    WeylSimilarity {
        residual: best,
        found: best < CLIFFORD_TOLERANCE,
    }
}

/// Weyl `{γ⁰γ¹, γ⁰γ², γ⁰γ³, γ⁰}`.
pub fn weyl_targets() -> [M4; 4] {
    let g = weyl_gammas();
    [g[0] * g[1], g[0] * g[2], g[0] * g[3], g[0]]
}

fn relations(b: &[M4; 4], names: &[&str; 4]) -> Vec<RelationCheck> {
    let check = |relation: String, residual: f64| RelationCheck {
        relation,
        residual,
        passed: residual < CLIFFORD_TOLERANCE,
    };
    let mut out = Vec::new();
    for k in 0..4 {
        out.push(check(format!("{}^2 = I", names[k]), identity_defect(&(b[k] * b[k]))));
    }
    for i in 0..4 {
        for j in i + 1..4 {
            let anti = b[i] * b[j] + b[j] * b[i];
            out.push(check(format!("{{{}, {}}} = 0", names[i], names[j]), max_entry(&anti)));
        }
    }
    out
}

/// Measures `B_x, B_y, B_z, B_0` for the rotations of `plan` on a
/// `3 × 3 × 3` lattice and checks the Clifford relations.
pub fn check_clifford(plan: &StepPlan) -> Result<CliffordReport> {
    if plan.flavor() != Flavor::ThreeD {
        return Err(WalkError::Mismatch("the Clifford check applies to the 3D walk".into()));
    }
    let rotations = *plan.rotations();
    let spacing = plan.epsilon();
    let lattice = vec![CHECK_SIZE; 3];
    let mut failures = Vec::new();

    let zeroth_order_defect = max_entry(&(rotations.zeroth_order_product().0 - nalgebra::Matrix2::identity()));
    let zeroth_order_passed = zeroth_order_defect < 1e-15;
    if !zeroth_order_passed {
        failures.push(format!("R_z R_x R_y = I violated by {zeroth_order_defect:.3e}"));
    }

    let b0_exact = b0_from_coupling() == b0();
    if !b0_exact {
        failures.push("B_0 read from the coupling coin differs from σ_x ⊗ I".into());
    }

    let unflipped = predicted_factors(&rotations, &z_unflipped());
    let unflipped_shift = UnflippedShiftCheck {
        max_anticommutator_with_b0: unflipped
            .iter()
            .map(|m| max_entry(&(m * b0() + b0() * m)))
            .fold(0.0, f64::max),
        max_commutator_with_b0: unflipped
            .iter()
            .map(|m| max_entry(&(m * b0() - b0() * m)))
            .fold(0.0, f64::max),
    };

    let mut report = CliffordReport {
        tolerance: CLIFFORD_TOLERANCE,
        lattice: lattice.clone(),
        zeroth_order_defect,
        zeroth_order_passed,
        b0_from_coupling_exact: b0_exact,
        measured: None,
        prediction_residual: None,
        relations: Vec::new(),
        weyl_similarity: None,
        unflipped_shift,
        failures,
        passed: false,
    };
    if !zeroth_order_passed {
        return Ok(report);
    }

    let geometry = LatticeGeometry::new(&lattice, spacing)?;
    let tiny = StepPlan::uniform(Flavor::ThreeD, &geometry, CHECK_THETA)?.with_rotations(rotations);
    let estimate = extract_generator(&tiny, &geometry, &default_epsilons(spacing))?;
    let factors = estimate.spin_factors(&[CHECK_THETA; CHECK_SIZE])?;
    let along = |axis| to_m4(factors.along(axis).expect("3D fit has every axis"));
    let mass = to_m4(factors.mass.as_ref().expect("θ̄ is nonzero"));
    let b = [
        along(Axis::X),
        along(Axis::Y),
        along(Axis::Z),
        mass * Complex64::new(0.0, -1.0),
    ];

    let predicted = predicted_factors(&rotations, &z_block_shift());
    let prediction_residual = (0..3).map(|k| max_entry(&(b[k] - predicted[k]))).fold(0.0, f64::max);

    report.relations = relations(&b, &["B_x", "B_y", "B_z", "B_0"]);
    let b0_residual = max_entry(&(b[3] - b0()));
    report.relations.push(RelationCheck {
        relation: "B_0 = σ_x ⊗ I".into(),
        residual: b0_residual,
        passed: b0_residual < CLIFFORD_TOLERANCE,
    });
    for r in report.relations.iter().filter(|r| !r.passed) {
        report.failures.push(format!("{} violated by {:.3e}", r.relation, r.residual));
    }
    let similarity = weyl_similarity(&b, &weyl_targets());
    if !similarity.found {
        report
            .failures
            .push(format!("no unitary maps the factors onto the Weyl set (best {:.3e})", similarity.residual));
    }
    report.weyl_similarity = Some(similarity);
    report.prediction_residual = Some(prediction_residual);
    report.measured = Some(MeasuredFactors {
        b_x: matrix_rows(&b[0]),
        b_y: matrix_rows(&b[1]),
        b_z: matrix_rows(&b[2]),
        b_0: matrix_rows(&b[3]),
        fit_residual: factors.fit_residual,
        generator_residual: estimate.residual,
        epsilons: estimate.epsilons.clone(),
    });
    report.passed = report.failures.is_empty();
    Ok(report)
}
