//! Planar three-body dynamics under homogeneous potentials, with checkers for
//! the kinematic identities of zero angular momentum motion, syzygy detection
//! and symmetric periodic-orbit shooting.

pub mod conserved;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod orbit;
pub mod scaling;
pub mod state;
pub mod syzygy;
pub mod vec2;

pub use dynamics::{integrate, IntegrateOptions, PotentialSpec, Termination, Trajectory};
pub use error::{Error, Result};
pub use state::{derived_quantities, DerivedQuantities, Masses, PhaseState, Tolerances};
pub use vec2::Vec2;
