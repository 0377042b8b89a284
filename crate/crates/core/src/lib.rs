//! Numerical laboratory for the torsion problem `-Δu = 1` in a planar domain
//! with `u = 0` on its boundary.
//!
//! The crate meshes parametric domains with quadratic triangles, solves the
//! Poisson problem, recovers the boundary flux variationally and locates the
//! boundary maxima of `|∇u|` ("fail points"). Closed-form solutions and
//! thin-domain asymptotics live in [`exact`]; [`experiments`] turns them into
//! machine-checkable reports.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod fem;
pub mod geometry;
pub mod numeric;

pub use analysis::{BoundaryProfile, CriticalKind, CriticalPoint, FailPointReport, NodalPath, PathEnd};
pub use config::RunConfig;
pub use error::{Error, Result};
pub use fem::{BoundaryFlux, Rhs, SolveOptions, TorsionSolution};
pub use geometry::{DomainSpec, Mesh, NarrowSpec, Point, PolyBoundaryFn, TriangleLandmarks};
