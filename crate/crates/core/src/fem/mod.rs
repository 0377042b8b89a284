//! Quadratic finite elements for `-Δu = f` with Dirichlet data, the
//! consistent boundary flux and interior gradient evaluation.

mod assemble;
mod flux;
mod solution;
pub mod sparse;

use std::sync::Arc;

pub use assemble::{assemble, assemble_with_dirichlet, LinearSystem};
pub use flux::{boundary_flux, BoundaryFlux, FluxSample};
pub use solution::{solve, solve_poisson, solve_torsion, SolveOptions, TorsionSolution};

use crate::geometry::Point;

/// Right-hand side `f` with a human-readable tag.
#[derive(Clone)]
pub struct Rhs {
    pub tag: String,
    f: Arc<dyn Fn(&Point) -> f64 + Send + Sync>,
}

impl Rhs {
    pub fn new(tag: impl Into<String>, f: impl Fn(&Point) -> f64 + Send + Sync + 'static) -> Self {
        Self { tag: tag.into(), f: Arc::new(f) }
    }

    /// `f ≡ 1`, the torsion problem.
    pub fn torsion() -> Self {
        Self::new("1", |_| 1.0)
    }

    pub fn eval(&self, p: &Point) -> f64 {
        (self.f)(p)
    }
}

impl std::fmt::Debug for Rhs {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Rhs({})", self.tag)
    }
}
