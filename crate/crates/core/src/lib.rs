//! Discrete-time quantum walks with a domain-wall coin.
//!
//! A spinor walker on a periodic 2D or 3D lattice is driven by split-step
//! coin and shift operators. The coin angle follows a tanh kink along one
//! axis, which confines the walker to the wall while it spreads freely along
//! the remaining axes. The [`continuum`] module checks the walk against its
//! Dirac-equation limit.

pub mod coin;
pub mod continuum;
pub mod engine;
pub mod error;
pub mod gamma;
pub mod lattice;
pub mod observables;
pub mod shift;

pub use coin::{
    coin_q, coin_theta_r, domain_wall_angle, rotation_set, AngleMode, Coin2x2, Coin4x4, DomainWallParams,
    RotationSet,
};
pub use engine::{dense_step_matrix, evolve, step, DenseOperator, EvolveOptions, Flavor, Observer, StepPlan, SubOp};
pub use error::{Result, WalkError};
pub use lattice::{
    make_gaussian_packet, probability_density, total_norm, Axis, GaussianPacketSpec, LatticeGeometry, SpinorField,
};
pub use observables::{axis_marginal, slab_mass, std_dev_per_axis, ObservableRecord, ObservableSeries};
pub use shift::{shift_2d, shift_2d_adjoint, shift_3d_block, shift_3d_block_adjoint};
