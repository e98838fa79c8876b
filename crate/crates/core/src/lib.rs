//! Explicit a priori and a posteriori error bounds for the P1 finite element
//! solution of the Neumann problem `−Δu + u = 0` in `Ω`, `∂u/∂n = f` on `Γ`.
//!
//! The central quantity is [`kappa::compute_kappa`], which evaluates
//!
//! ```text
//! κ_h = max_{f_h ∈ X_h} Y(f_h, β) / ‖f_h‖_b
//! ```
//!
//! by solving one P1 problem and one lowest-order Raviart–Thomas mixed problem
//! per boundary edge and maximizing a generalized Rayleigh quotient. Combined
//! with the trace constant [`constants::c1_of_mesh`] this gives
//! `M_h = √(κ_h² + C₁(h)²)` and the bounds
//!
//! ```text
//! ‖u − u_h‖₁ ≤ M_h ‖f‖_b          ‖u − u_h‖_b ≤ M_h² ‖f‖_b
//! ```
//!
//! Everything is generic over [`Scalar`] (`f32`, `f64`); the `*64` aliases
//! below are what the command line tool uses.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod error;
pub mod estimator;
pub mod fields;
pub mod kappa;
pub mod linalg;
pub mod mesh;
pub mod p1;
pub mod quadrature;
pub mod rt0;
mod scalar;
pub mod tables;
pub mod verify;

pub use constants::{c0_times_h, c1_of_mesh, ExplicitConstants, TraceCoefficient};
pub use error::{Error, Result};
pub use estimator::{BoundReport, BoundaryFunction};
pub use fields::{BoundaryData, PiecewiseConstantField};
pub use kappa::{compute_kappa, compute_kappa_with, KappaOptions, KappaResult, YParams};
pub use linalg::SolverOptions;
pub use mesh::{generate, generate_with_budget, DomainId, Mesh, MeshError, Point};
pub use scalar::Scalar;

pub type Mesh64 = Mesh<f64>;
pub type Mesh32 = Mesh<f32>;
pub type BoundaryData64 = BoundaryData<f64>;
pub type KappaResult64 = KappaResult<f64>;
