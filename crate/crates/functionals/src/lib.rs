//! Core functionals of maps S^{n-1} -> R^n: the conformal (n-1)-Dirichlet
//! energy, the extrinsic volume, the combined conformal-isoperimetric
//! deficit, the conformality defect, topological degree computations, and
//! the weak Euler-Lagrange residual.

pub mod degree;
pub mod energy;
pub mod residual;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FunctionalError {
    #[error("map is not sphere-valued: |u| = {0} at some node")]
    NotSphereValued(f64),
    #[error("degree estimate {0} is too far from an integer (under-resolved map)")]
    DegreeAmbiguous(f64),
    #[error("volume {0} below the floor; deficit machinery undefined")]
    VolumeTooSmall(f64),
    #[error("linear solver stalled at relative residual {0}")]
    SolverStalled(f64),
}

pub use degree::{
    degree_sphere_valued, degree_tube_radius, local_degree_field, DegreeField, DEGREE_TOL,
    SPHERE_VALUED_TOL,
};
pub use energy::{
    conformality_defect, deficit, dirichlet_energy, flip, hadamard_slack, volume, EnergyReport,
    VOLUME_FLOOR,
};
pub use residual::{
    el_residual, el_residual_covector, l2_gram_scalar, seminorm_gram_scalar, w12_gram_scalar,
};
