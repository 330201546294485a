//! Checks of the walk against its continuum Dirac limit.

pub mod clifford;
pub mod convergence;
pub mod dirac;
pub mod generator;
pub mod spectral;

pub use clifford::{check_clifford, CliffordReport, RelationCheck, CLIFFORD_TOLERANCE};
pub use convergence::{convergence_study, ConvergenceRow, ConvergenceSetup, ConvergenceTable};
pub use dirac::{dirac_evolve_2d, frame_rotation, DiracFrame, DiracOperator2d, DiracRun};
pub use generator::{default_epsilons, extract_generator, family_step_matrix, GeneratorEstimate, SpinFactors};
