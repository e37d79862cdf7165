//! Positive solutions of the perturbed concave-convex p-Laplacian problem
//!
//! ```text
//! −Δ_p u = λ(|u|^{α−2}u − |u|^{γ−2}u) + |u|^{β−2}u  in Ω,   u = 0 on ∂Ω,
//! 1 < α < p < β < γ < p*
//! ```
//!
//! on uniform 1D and 2D grids. Two solutions come from minimizing the energy
//! over the first and third roots of the fibering equation along directions of
//! the unit sphere; the third is a mountain-pass point of the truncated energy.

// `!(x > 0.0)` is used on purpose so that NaN fails the test.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fibering;
pub mod functionals;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod mesh;
pub mod roots;
pub mod solvers;

pub use error::{Error, Result};
pub use fibering::{BranchId, FiberingRoots, TildeRoots};
pub use functionals::{EnergyBreakdown, ExponentConfig, Moments};
pub use mesh::{build_mesh, Field, Mesh, MeshSpec, Rectify};
