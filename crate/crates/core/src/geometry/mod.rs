//! Domain families, quadratic triangular meshes and triangle landmarks.

mod domain;
pub mod element;
mod landmarks;
mod mesh;
mod meshgen;
mod poly;

pub use domain::{DomainSpec, NarrowSpec};
pub use landmarks::{curvature_graph, triangle_landmarks, GraphSide, TriangleLandmarks};
pub(crate) use mesh::quad_deriv;
pub use mesh::{BoundaryEdge, Mesh, SideInfo};
pub use meshgen::{annulus_mesh, build_mesh, ellipse_mesh, narrow_mesh, rectangle_mesh, triangle_mesh};
pub use poly::{PolyBoundaryFn, MAX_DEGREE};

/// Point or vector in the plane; serializes as `[x, y]`.
pub type Point = nalgebra::Vector2<f64>;
