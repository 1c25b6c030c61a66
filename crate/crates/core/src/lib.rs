//! Learn Lagrangian dynamics of classical systems from noisy samples with a
//! neural Lagrangian whose first layer enforces continuous symmetries, so the
//! corresponding Noether charges are conserved by construction; integrate the
//! learned dynamics and audit the conservation behaviour.
//!
//! Pipeline: a [`invariants::SymmetrySpec`] builds group-invariant features,
//! [`network::LagrangianModel`] stacks dense softplus layers on top,
//! [`dynamics::acceleration`] turns the scalar into q̈ via the Euler–Lagrange
//! formula, [`training`] fits weights to noisy accelerations of a
//! [`systems::SystemSpec`], [`integrator`] rolls trajectories out and
//! [`diagnostics`] measures charge drift and perturbation growth.

pub mod diagnostics;
pub mod diffcore;
pub mod dual;
pub mod dynamics;
pub mod error;
pub mod integrator;
pub mod invariants;
pub mod linalg;
pub mod network;
pub mod real;
pub mod seeds;
pub mod systems;
pub mod training;

pub use error::{Error, Result};
