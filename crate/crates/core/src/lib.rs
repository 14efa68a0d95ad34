//! Simulation and numerical verification of hybrid Hamiltonian
//! systems.
//!
//! A hybrid Hamiltonian system couples a smooth Hamiltonian flow on a
//! canonical phase space with an impact map applied whenever the state
//! reaches a switching surface. This crate provides:
//!
//! - [`state`], [`observable`], [`system`], [`trajectory`]: the shared
//!   domain types (phase states, scalar fields, guarded impact
//!   components, hybrid trajectories);
//! - [`symplectic`]: Hamiltonian vector fields, Poisson brackets,
//!   involution and functional-independence checks, Lagrangian and
//!   Darboux tests;
//! - [`flow`]: Stormer-Verlet and RK4 time stepping, impact-event
//!   localization and the full hybrid flow with Zeno protection;
//! - [`elliptic`]: complete/incomplete elliptic integrals and Jacobi
//!   elliptic functions (parameter convention `m`);
//! - [`charts`]: action-angle coordinate charts for the built-in
//!   models and conjugation of impact maps into chart coordinates;
//! - [`models`]: the rolling disk bouncing between two walls and the
//!   pendulum hitting a floor;
//! - [`verify`]: the certification engine deciding, numerically,
//!   whether observables are (generalized) hybrid constants of the
//!   motion, and assembling complete-integrability certificates.

pub mod charts;
pub mod elliptic;
pub mod error;
pub mod flow;
pub mod models;
pub mod observable;
pub mod state;
pub mod symplectic;
pub mod system;
pub mod trajectory;
pub mod verify;

pub use error::{Error, Result};
pub use observable::Observable;
pub use state::{CoordKind, PhaseState};
pub use system::{Approach, GuardedImpact, HybridSystem, DEFAULT_GUARD_TOL};
pub use trajectory::{HybridTrajectory, ImpactEvent, Termination, TrajectoryArc};
