//! Discretizations of the unit sphere S^{n-1} (n in 3..=5) with quadrature,
//! tangent frames and differentiation stencils, plus discrete sphere maps.
//!
//! Two backends share one interface: an icosphere triangle mesh with
//! circumcenter quadrature and quadratic reconstruction (n = 3), and dual
//! stereographic chart grids with finite differences (n in 3..=5).

mod chart;
mod mesh;

pub mod domain;
pub mod harmonics;
pub mod map;
pub mod sparse;
pub mod wedge;

pub use chart::{build_chart_grid, sphere_area};
pub use domain::{BackendKind, ChartData, Domain, DomainError, MeshData};
pub use map::{jacobian_wedge, MapSource, SphereMap};
pub use mesh::build_icosphere;
